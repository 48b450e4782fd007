"""Construction and validation of transmit/receive correlation matrices.

A validated pair carries the eigenvalues of both matrices with the
smaller-dimension side ("minor") and larger-dimension side ("major")
roles already assigned, which is the form the distribution code needs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import ValidationError

# Unit-diagonal / Hermitian tolerance for user-supplied matrices. Files may
# carry rounding; beyond this we hard-fail rather than silently renormalize.
_INPUT_TOL = 1e-10


def exp_correlation(rho: float, size: int) -> np.ndarray:
    """Exponential correlation matrix: entry (i, j) is rho^|i-j|.

    Real symmetric Toeplitz with unit diagonal; positive-definite for
    0 <= rho < 1.
    """
    rho = float(rho)
    if not (0.0 <= rho < 1.0):
        raise ValidationError(f"rho must lie in [0, 1), got {rho!r}")
    if not isinstance(size, (int, np.integer)) or size < 1:
        raise ValidationError(f"size must be a positive integer, got {size!r}")
    idx = np.arange(size)
    return (rho ** np.abs(idx[:, None] - idx[None, :])).astype(np.complex128)


@dataclass(frozen=True)
class CorrelationPair:
    """Validated receive/transmit correlation matrices with assigned roles.

    ``minor_eigs`` are the eigenvalues of whichever matrix sits on the
    smaller dimension of the link (receive side when n_rx <= n_tx,
    transmit side otherwise); ``major_eigs`` belong to the other matrix.
    Both lists are ascending and strictly positive.
    """

    rx_corr: np.ndarray
    tx_corr: np.ndarray
    n_min: int
    n_max: int
    gap: int  # n_max - n_min
    minor_eigs: np.ndarray
    major_eigs: np.ndarray


def _validate_correlation(mat: np.ndarray, label: str) -> np.ndarray:
    m = linalg.as_matrix(mat)
    if m.shape[0] != m.shape[1]:
        raise ValidationError(f"{label} correlation matrix must be square, got {m.shape}")
    if np.max(np.abs(m - m.conj().T)) > _INPUT_TOL:
        raise ValidationError(f"{label} correlation matrix is not Hermitian (tolerance {_INPUT_TOL:g})")
    if np.max(np.abs(np.diag(m) - 1.0)) > _INPUT_TOL:
        raise ValidationError(f"{label} correlation matrix must have unit diagonal (tolerance {_INPUT_TOL:g})")
    return 0.5 * (m + m.conj().T)


def make_pair(rx_corr, tx_corr) -> CorrelationPair:
    """Validate the two matrices and assign minor/major roles by dimension.

    The receive matrix takes the minor role when the receive side is the
    smaller (or equal) dimension, otherwise the transmit matrix does.
    """
    rx = _validate_correlation(rx_corr, "receive")
    tx = _validate_correlation(tx_corr, "transmit")
    n_rx, n_tx = rx.shape[0], tx.shape[0]
    minor_mat, major_mat = (rx, tx) if n_rx <= n_tx else (tx, rx)

    minor_eigs = linalg.herm_eig(minor_mat).eigenvalues
    major_eigs = linalg.herm_eig(major_mat).eigenvalues
    if minor_eigs[0] <= 0.0:
        which = "receive" if n_rx <= n_tx else "transmit"
        raise ValidationError(
            f"{which} correlation matrix is not positive-definite "
            f"(min eigenvalue {minor_eigs[0]:.3e})"
        )
    if major_eigs[0] <= 0.0:
        which = "transmit" if n_rx <= n_tx else "receive"
        raise ValidationError(
            f"{which} correlation matrix is not positive-definite "
            f"(min eigenvalue {major_eigs[0]:.3e})"
        )

    return CorrelationPair(
        rx_corr=rx,
        tx_corr=tx,
        n_min=min(n_rx, n_tx),
        n_max=max(n_rx, n_tx),
        gap=abs(n_rx - n_tx),
        minor_eigs=minor_eigs,
        major_eigs=major_eigs,
    )


def det_minor(pair: CorrelationPair) -> float:
    """Determinant of the minor-side matrix (product of its eigenvalues)."""
    return float(np.prod(pair.minor_eigs))


def det_major(pair: CorrelationPair) -> float:
    """Determinant of the major-side matrix (product of its eigenvalues)."""
    return float(np.prod(pair.major_eigs))


def correlation_penalty(pair: CorrelationPair) -> float:
    """Array-gain reduction factor det_minor^{1/n_min} * det_major^{1/n_max}.

    Equals 1 exactly when both matrices are identity; strictly below 1
    otherwise (Hadamard's inequality with unit diagonals).
    """
    return det_minor(pair) ** (1.0 / pair.n_min) * det_major(pair) ** (1.0 / pair.n_max)


def _format_entry(z: complex) -> str:
    if z.imag == 0.0:
        return f"{z.real:.17g}"
    return f"{z.real:.17g}{z.imag:+.17g}j"


def save_matrix_csv(path, matrix) -> None:
    """Write a square matrix as CSV, one row per line.

    Real entries are written plain; complex entries as ``re+imj``. The
    same format is accepted by :func:`load_matrix_csv`.
    """
    m = linalg.as_matrix(matrix)
    with open(path, "w", newline="\n") as fh:
        for row in m:
            fh.write(",".join(_format_entry(complex(z)) for z in row) + "\n")


def load_matrix_csv(path) -> np.ndarray:
    """Read a square numeric grid written by :func:`save_matrix_csv`.

    Accepts plain reals or ``re+imj`` complex entries.
    """
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([complex(tok.strip()) for tok in line.split(",")])
            except ValueError as exc:
                raise ValidationError(f"unparseable matrix entry in {path}: {exc}") from exc
    if not rows:
        raise ValidationError(f"no matrix rows found in {path}")
    width = len(rows[0])
    if any(len(r) != width for r in rows) or width != len(rows):
        raise ValidationError(f"matrix in {path} is not a square grid")
    return linalg.as_matrix(rows)
