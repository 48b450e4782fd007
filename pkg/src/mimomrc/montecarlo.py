"""Monte-Carlo channel simulator: the independent oracle for the analytic
distribution and error-rate formulas.

Channels are drawn as corr_rx^{1/2} * white * corr_tx^{1/2} with unit-
variance complex Gaussian entries. Trials are partitioned into fixed-size
batches, each driven by its own jumped Philox stream keyed by (seed,
batch index), and batch statistics are merged with a pairwise scheme, so
results are bit-identical for a given (config, seed) regardless of how
many workers process the batches.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import linalg
from .correlation import CorrelationPair, exp_correlation, make_pair
from .errors import ValidationError
from .performance import Modulation, snr_from_db
from .specfun import gauss_q

_BATCH = 1 << 16


@dataclass(frozen=True, eq=False)
class McConfig:
    """Simulation setup: geometry, correlation, trial count, seed.

    Correlation is either the exponential model through rho_rx/rho_tx or
    explicit matrices (which take precedence when given).
    """

    n_rx: int
    n_tx: int
    rho_rx: float = 0.0
    rho_tx: float = 0.0
    rx_corr: np.ndarray | None = None
    tx_corr: np.ndarray | None = None
    trials: int = 100_000
    seed: int = 12345

    def __post_init__(self):
        if not isinstance(self.n_rx, (int, np.integer)) or self.n_rx < 1:
            raise ValidationError(f"n_rx must be a positive integer, got {self.n_rx!r}")
        if not isinstance(self.n_tx, (int, np.integer)) or self.n_tx < 1:
            raise ValidationError(f"n_tx must be a positive integer, got {self.n_tx!r}")
        if not isinstance(self.trials, (int, np.integer)) or self.trials < 1:
            raise ValidationError(f"trials must be a positive integer, got {self.trials!r}")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2**64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        for rho, label in ((self.rho_rx, "rho_rx"), (self.rho_tx, "rho_tx")):
            if not (0.0 <= float(rho) < 1.0):
                raise ValidationError(f"{label} must lie in [0, 1), got {rho!r}")
        for mat, size, label in (
            (self.rx_corr, self.n_rx, "rx_corr"),
            (self.tx_corr, self.n_tx, "tx_corr"),
        ):
            if mat is not None and np.asarray(mat).shape != (size, size):
                raise ValidationError(
                    f"{label} must be {size}x{size}, got shape {np.asarray(mat).shape}"
                )


@dataclass(frozen=True)
class McResult:
    estimate: float
    std_error: float
    trials: int


def corr_matrices(cfg: McConfig) -> tuple[np.ndarray, np.ndarray]:
    """Receive and transmit correlation matrices implied by the config."""
    rx = linalg.as_matrix(cfg.rx_corr) if cfg.rx_corr is not None else exp_correlation(cfg.rho_rx, cfg.n_rx)
    tx = linalg.as_matrix(cfg.tx_corr) if cfg.tx_corr is not None else exp_correlation(cfg.rho_tx, cfg.n_tx)
    return rx, tx


def to_pair(cfg: McConfig) -> CorrelationPair:
    """Validated correlation pair for the analytic model of this config."""
    rx, tx = corr_matrices(cfg)
    return make_pair(rx, tx)


def _batch_rng(seed: int, index: int) -> np.random.Generator:
    # Philox is counter based; jumping by the batch index yields
    # non-overlapping streams that do not depend on execution order.
    return np.random.Generator(np.random.Philox(seed).jumped(index))


def _draw_white(rng: np.random.Generator, count: int, n_rx: int, n_tx: int) -> np.ndarray:
    real = rng.standard_normal((count, n_rx, n_tx))
    imag = rng.standard_normal((count, n_rx, n_tx))
    return (real + 1j * imag) * math.sqrt(0.5)


def draw_channel(cfg: McConfig, rng: np.random.Generator) -> np.ndarray:
    """One correlated channel draw using the given stream state."""
    rx, tx = corr_matrices(cfg)
    rx_root = linalg.herm_sqrt(rx)
    tx_root = linalg.herm_sqrt(tx)
    white = _draw_white(rng, 1, cfg.n_rx, cfg.n_tx)[0]
    return rx_root @ white @ tx_root


def max_eig_snr(h, snr_db: float, check: bool = False) -> tuple[float, float]:
    """Largest eigenvalue of the channel Gram matrix and the output SNR.

    The Gram matrix is formed on the smaller side of the channel (same
    nonzero spectrum, smaller eigenproblem). With ``check=True`` the
    eigenvector is verified to attain the eigenvalue as a Rayleigh
    quotient and to dominate random beamforming directions.
    """
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or not np.all(np.isfinite(h)):
        raise ValidationError("channel matrix must be a finite 2-D array")
    n_rx, n_tx = h.shape
    gram_small = h.conj().T @ h if n_tx <= n_rx else h @ h.conj().T
    lam = float(np.linalg.eigvalsh(gram_small)[-1])
    gbar = snr_from_db(snr_db)
    if check:
        gram = h.conj().T @ h
        vals, vecs = np.linalg.eigh(gram)
        w_opt = vecs[:, -1]
        quad = float(np.real(w_opt.conj() @ gram @ w_opt))
        assert abs(quad - lam) <= 1e-10 * max(1.0, lam)
        probe_rng = np.random.default_rng(0)
        for _ in range(8):
            w = probe_rng.standard_normal(n_tx) + 1j * probe_rng.standard_normal(n_tx)
            w /= np.linalg.norm(w)
            assert float(np.real(w.conj() @ gram @ w)) <= lam * (1.0 + 1e-10)
    return lam, gbar * lam


def _lambda_batches(cfg: McConfig, workers: int = 1):
    """Largest-eigenvalue samples in fixed batches, deterministic order."""
    rx, tx = corr_matrices(cfg)
    rx_root = linalg.herm_sqrt(rx)
    tx_root = linalg.herm_sqrt(tx)
    counts = []
    left = cfg.trials
    while left > 0:
        counts.append(min(_BATCH, left))
        left -= counts[-1]

    def one(index_count):
        index, count = index_count
        rng = _batch_rng(cfg.seed, index)
        white = _draw_white(rng, count, cfg.n_rx, cfg.n_tx)
        h = rx_root @ white @ tx_root
        if cfg.n_tx <= cfg.n_rx:
            gram = np.einsum("bij,bik->bjk", h.conj(), h)
        else:
            gram = np.einsum("bij,bkj->bik", h, h.conj())
        return np.linalg.eigvalsh(gram)[:, -1]

    tasks = list(enumerate(counts))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, tasks))
    return [one(t) for t in tasks]


def simulate_lambda_max(cfg: McConfig, workers: int = 1) -> np.ndarray:
    """All largest-eigenvalue samples for the config (trials,)."""
    return np.concatenate(_lambda_batches(cfg, workers=workers))


def empirical_cdf(cfg: McConfig, grid, workers: int = 1) -> np.ndarray:
    """Fraction of simulated largest eigenvalues at or below each grid point."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValidationError("grid must be a nonempty 1-D array")
    if np.any(np.diff(grid) < 0.0):
        raise ValidationError("grid must be ascending")
    samples = np.sort(simulate_lambda_max(cfg, workers=workers))
    return np.searchsorted(samples, grid, side="right") / cfg.trials


def _merge(stat_a, stat_b):
    n_a, mean_a, m2_a = stat_a
    n_b, mean_b, m2_b = stat_b
    n = n_a + n_b
    delta = mean_b - mean_a
    mean = mean_a + delta * n_b / n
    m2 = m2_a + m2_b + delta * delta * n_a * n_b / n
    return (n, mean, m2)


def _pairwise_reduce(stats):
    while len(stats) > 1:
        merged = [_merge(stats[i], stats[i + 1]) for i in range(0, len(stats) - 1, 2)]
        if len(stats) % 2:
            merged.append(stats[-1])
        stats = merged
    return stats[0]


def _mean_result(batch_values) -> McResult:
    stats = []
    for values in batch_values:
        mean = float(values.mean())
        stats.append((len(values), mean, float(((values - mean) ** 2).sum())))
    n, mean, m2 = _pairwise_reduce(stats)
    std_error = math.sqrt(m2 / (n - 1) / n) if n > 1 else 0.0
    return McResult(estimate=mean, std_error=std_error, trials=n)


def mc_ser(cfg: McConfig, mod: Modulation, snr_db: float, workers: int = 1) -> McResult:
    """Semi-analytic SER: the sample mean of a*Q(sqrt(2*b*snr*lambda)).

    Unbiased for the ensemble-average SER with far lower variance than
    symbol counting, which is what the quadrature result is compared to.
    """
    gbar = snr_from_db(snr_db)
    batches = [
        mod.a * gauss_q(np.sqrt(2.0 * mod.b * gbar * lam))
        for lam in _lambda_batches(cfg, workers=workers)
    ]
    return _mean_result(batches)


def mc_outage(cfg: McConfig, snr_db: float, gamma_th: float, workers: int = 1) -> McResult:
    """Fraction of trials whose output SNR falls at or below gamma_th."""
    gamma_th = float(gamma_th)
    if not (gamma_th > 0.0 and math.isfinite(gamma_th)):
        raise ValidationError(f"outage threshold must be positive, got {gamma_th!r}")
    gbar = snr_from_db(snr_db)
    hits = 0
    for lam in _lambda_batches(cfg, workers=workers):
        hits += int(np.count_nonzero(gbar * lam <= gamma_th))
    p = hits / cfg.trials
    std_error = math.sqrt(p * (1.0 - p) / cfg.trials)
    return McResult(estimate=p, std_error=std_error, trials=cfg.trials)
