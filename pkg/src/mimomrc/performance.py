"""Symbol-error-rate and outage analytics built on the max-eigenvalue
distribution: exact SER by quadrature, its high-SNR power-law form with
diversity order and array gain, and exact/asymptotic outage probability.

Average SNR always enters these interfaces in dB; outage thresholds are
linear SNR ratios. Everything is a pure function over immutable models,
so sweep points may be evaluated concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .correlation import correlation_penalty
from .eigdist import EigDistModel, asymptotic_cdf, exact_cdf_stable
from .errors import QuadratureError, ValidationError
from .specfun import double_factorial_odd, log_multivariate_gamma_norm

# Result tolerance for the SER quadrature: absolute 1e-12 or relative
# 1e-8, whichever is looser.
_SER_ABS_TOL = 1e-12
_SER_REL_TOL = 1e-8

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(31)
_MAX_BISECTIONS = 40
_MAX_BLOCKS = 400


@dataclass(frozen=True)
class Modulation:
    """Constants (a, b) of the error-rate template a*Q(sqrt(2*b*snr))."""

    name: str
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0.0 and math.isfinite(self.a)):
            raise ValidationError(f"modulation constant a must be positive, got {self.a!r}")
        if not (self.b > 0.0 and math.isfinite(self.b)):
            raise ValidationError(f"modulation constant b must be positive, got {self.b!r}")


# Built-in constants for the a*Q(sqrt(2 b snr)) template. The 8PSK pair is
# the standard template approximation; QPSK is a convenience preset.
MODULATIONS = {
    "bpsk": Modulation("bpsk", a=1.0, b=1.0),
    "qpsk": Modulation("qpsk", a=2.0, b=0.5),
    "8psk": Modulation("8psk", a=2.0, b=0.146),
}


def modulation_preset(name: str) -> Modulation:
    try:
        return MODULATIONS[name.lower()]
    except KeyError:
        raise ValidationError(
            f"unknown modulation {name!r}; choose from {sorted(MODULATIONS)}"
        ) from None


def snr_from_db(snr_db: float) -> float:
    snr_db = float(snr_db)
    if not math.isfinite(snr_db):
        raise ValidationError(f"SNR must be finite, got {snr_db!r}")
    return 10.0 ** (snr_db / 10.0)


def _gl_panel(f, lo: float, hi: float) -> float:
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    total = 0.0
    for node, weight in zip(_GL_NODES, _GL_WEIGHTS):
        total += weight * f(mid + half * node)
    return half * total


def _adaptive(f, lo, hi, whole, tol, floor, noise_rate, depth) -> float:
    mid = 0.5 * (lo + hi)
    left = _gl_panel(f, lo, mid)
    right = _gl_panel(f, mid, hi)
    err = abs(left + right - whole)
    # Two extra acceptance paths beyond the split tolerance: a floor that
    # ends the recursion once the local error is negligible against the
    # whole integral (a step in the integrand, like the distribution's
    # saturation point, otherwise recurses forever because error and
    # tolerance shrink at the same rate), and a width-proportional budget
    # matching the integrand's own noise floor (the tied-eigenvalue
    # guard's wobble cannot be refined away).
    if err <= tol or err <= floor or err <= noise_rate * (hi - lo):
        return left + right
    if depth <= 0:
        raise QuadratureError(
            f"quadrature failed to reach tolerance {tol:.3e} on [{lo:g}, {hi:g}]",
            estimate=left + right,
            error_bound=err,
        )
    return (
        _adaptive(f, lo, mid, left, 0.5 * tol, floor, noise_rate, depth - 1)
        + _adaptive(f, mid, hi, right, 0.5 * tol, floor, noise_rate, depth - 1)
    )


def _integrate_blocks(f, b: float, tol: float, floor: float, noise_rate: float) -> float:
    """Integrate f over [0, inf) where f decays at least like exp(-b v^2).

    Fixed-width blocks are appended until the Gaussian envelope at the
    block boundary falls below 1e-16 of the running total; each block is
    refined by adaptive bisection of a 31-point Gauss-Legendre rule.
    """
    width = 1.0 / math.sqrt(b)
    total = 0.0
    for k in range(_MAX_BLOCKS):
        lo = k * width
        hi = lo + width
        whole = _gl_panel(f, lo, hi)
        total += _adaptive(
            f, lo, hi, whole, tol * 0.5 ** (k + 2) + 1e-300, floor, noise_rate, _MAX_BISECTIONS
        )
        if total > 0.0 and math.exp(-b * hi * hi) < 1e-16 * total:
            return total
    raise QuadratureError(
        "semi-infinite quadrature did not converge within the block budget",
        estimate=total,
        error_bound=math.inf,
    )


def exact_ser(model: EigDistModel, mod: Modulation, snr_db: float) -> float:
    """Average symbol error rate by quadrature of the c.d.f. kernel.

    The defining average of a*Q(sqrt(2*b*snr)) over the fading SNR is
    evaluated in its integrated-by-parts form over the output-SNR c.d.f.;
    substituting u = v^2 removes the endpoint singularity, leaving
    (a sqrt(b) / sqrt(pi)) * int_0^inf exp(-b v^2) F(v^2 / snr) dv with a
    smooth Gaussian-tailed integrand.

    Accuracy is the stated quadrature tolerance (absolute 1e-12 or
    relative 1e-8, whichever is looser) for models with distinct
    correlation eigenvalues; models on the tied-eigenvalue guard carry
    the guard's noise floor, which at low SNR loosens the achievable
    relative accuracy to roughly ``model.noise_floor``.
    """
    gbar = snr_from_db(snr_db)
    scale = mod.a * math.sqrt(mod.b) / math.sqrt(math.pi)

    def integrand(v: float) -> float:
        return math.exp(-mod.b * v * v) * exact_cdf_stable(model, v * v / gbar)

    # Quick single-panel pass to size the tolerance (abs 1e-12 / rel 1e-8
    # on the SER, whichever is looser), then the adaptive pass.
    width = 1.0 / math.sqrt(mod.b)
    rough = sum(
        _gl_panel(integrand, k * width, (k + 1) * width) for k in range(32)
    )
    tol = max(_SER_ABS_TOL, _SER_REL_TOL * scale * abs(rough)) / scale
    floor = 1e-15 * max(abs(rough), 1e-300)
    value = scale * _integrate_blocks(integrand, mod.b, tol, floor, model.noise_floor)
    return min(1.0, max(0.0, value))


@dataclass(frozen=True)
class HighSnrSer:
    """High-SNR SER law (array_gain * snr)^(-diversity_order)."""

    diversity_order: int
    array_gain: float
    model: EigDistModel


def high_snr_ser(model: EigDistModel, mod: Modulation) -> HighSnrSer:
    """Diversity order and array gain of the high-SNR SER power law.

    The diversity order is the antenna product regardless of correlation;
    correlation scales the array gain down by the determinant penalty
    factor. Accumulated in logs so large antenna counts cannot overflow.
    """
    n, m = model.n_min, model.n_max
    mn = n * m
    log_inner = (
        math.log(mod.a)
        + log_multivariate_gamma_norm(n, n)
        - math.log(2.0)
        - log_multivariate_gamma_norm(n, m + n)
        + math.log(double_factorial_odd(mn))
    )
    log_gain = (
        math.log(correlation_penalty(model.pair))
        + math.log(2.0 * mod.b)
        - log_inner / mn
    )
    return HighSnrSer(diversity_order=mn, array_gain=math.exp(log_gain), model=model)


def ser_asymptote_eval(hs: HighSnrSer, snr_db: float) -> float:
    """Evaluate (array_gain * snr)^(-diversity_order) at the given dB SNR."""
    gbar = snr_from_db(snr_db)
    return math.exp(-hs.diversity_order * (math.log(hs.array_gain) + math.log(gbar)))


def exact_outage(model: EigDistModel, snr_db: float, gamma_th: float) -> float:
    """Probability that the combiner output SNR falls below gamma_th.

    gamma_th is a linear SNR threshold; the average SNR is given in dB.
    """
    gamma_th = float(gamma_th)
    if not (gamma_th > 0.0 and math.isfinite(gamma_th)):
        raise ValidationError(f"outage threshold must be positive, got {gamma_th!r}")
    return exact_cdf_stable(model, gamma_th / snr_from_db(snr_db))


def asymptotic_outage(model: EigDistModel, snr_db: float, gamma_th: float) -> float:
    """Leading-order outage: alpha * (gamma_th / snr)^(n_min*n_max)."""
    gamma_th = float(gamma_th)
    if not (gamma_th > 0.0 and math.isfinite(gamma_th)):
        raise ValidationError(f"outage threshold must be positive, got {gamma_th!r}")
    return asymptotic_cdf(model, gamma_th / snr_from_db(snr_db))
