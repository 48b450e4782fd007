"""Special functions for the eigenvalue-distribution and error-rate formulas."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erfc

from .errors import ValidationError


def reg_lower_gamma(l: int, y: float) -> float:
    """Regularized lower incomplete gamma at integer order:
    P(l; y) = 1 - e^{-y} sum_{k=0}^{l-1} y^k / k!.

    Evaluated through the exact finite sum (l is always a small integer
    here); monotone nondecreasing in y.
    """
    if not isinstance(l, (int, np.integer)) or l < 1:
        raise ValidationError(f"order must be an integer >= 1, got {l!r}")
    y = float(y)
    if not math.isfinite(y) or y < 0.0:
        raise ValidationError(f"argument must be finite and >= 0, got {y!r}")
    term = 1.0
    partial = 1.0
    for k in range(1, l):
        term *= y / k
        partial += term
    value = 1.0 - math.exp(-y) * partial
    return min(1.0, max(0.0, value))


def multivariate_gamma_norm(n: int, m: int) -> int:
    """Normalized complex multivariate gamma: product_{i=1}^{n} Gamma(m - i + 1).

    All arguments are positive integers here, so the result is the exact
    integer product of factorials (m - i)!.
    """
    _check_gamma_args(n, m)
    out = 1
    for i in range(1, n + 1):
        out *= math.factorial(m - i)
    return out


def log_multivariate_gamma_norm(n: int, m: int) -> float:
    """log of ``multivariate_gamma_norm``, safe for large arguments."""
    _check_gamma_args(n, m)
    return sum(math.lgamma(m - i + 1) for i in range(1, n + 1))


def _check_gamma_args(n: int, m: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValidationError(f"n must be an integer >= 1, got {n!r}")
    if not isinstance(m, (int, np.integer)) or m - n + 1 < 1:
        raise ValidationError(
            f"m must satisfy m - n + 1 >= 1 so every gamma argument is positive, got n={n}, m={m}"
        )


def double_factorial_odd(k: int) -> int:
    """(2k - 1)!! = 1 * 3 * ... * (2k - 1) for k >= 1."""
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValidationError(f"k must be an integer >= 1, got {k!r}")
    return math.prod(range(1, 2 * k, 2))


def gauss_q(x):
    """Gaussian tail probability Q(x) = 0.5 erfc(x / sqrt(2)).

    Accepts scalars or numpy arrays. Relative accuracy is that of the
    library erfc (a few ulp, far below the 1e-12 needed by the error-rate
    integrals); underflows cleanly to 0 in the far tail.
    """
    if np.isscalar(x):
        return 0.5 * float(erfc(float(x) / math.sqrt(2.0)))
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))
