"""Small dense complex-matrix kernel.

Hermitian eigendecomposition, Hermitian square root, determinants and
Vandermonde products for the handful-of-antennas matrices used by the
distribution code. Algorithms are chosen for robustness at tiny sizes,
not asymptotic speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError

# Hermitian-ness is checked entrywise against this absolute tolerance.
HERMITIAN_ATOL = 1e-12

# Jacobi sweep control: stop once the off-diagonal Frobenius mass falls
# below this fraction of the diagonal norm.
_JACOBI_REL_TOL = 1e-14
_JACOBI_MAX_SWEEPS = 100


def as_matrix(a) -> np.ndarray:
    """Coerce input to a 2-D complex128 array, rejecting non-finite entries."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValidationError(f"expected a 2-D matrix, got {m.ndim} dimension(s)")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix entries must be finite")
    return m


def _require_square(m: np.ndarray, op: str) -> None:
    if m.shape[0] != m.shape[1]:
        raise ValidationError(f"{op} requires a square matrix, got shape {m.shape}")


def _require_hermitian(m: np.ndarray, op: str, atol: float = HERMITIAN_ATOL) -> None:
    if m.size and np.max(np.abs(m - m.conj().T)) > atol:
        raise ValidationError(f"{op} requires a Hermitian matrix (tolerance {atol:g})")


@dataclass(frozen=True)
class HermitianEig:
    """Spectral decomposition A = V diag(w) V† with w ascending.

    ``eigenvalues[k]`` pairs with the unit-norm column ``eigenvectors[:, k]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def herm_eig(a) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Robust and simple for the tiny matrices used here. Raises
    ``NumericalError`` if the off-diagonal mass has not collapsed after
    the sweep cap (does not happen for Hermitian input in practice).
    """
    m = as_matrix(a)
    _require_square(m, "herm_eig")
    _require_hermitian(m, "herm_eig")
    n = m.shape[0]
    work = 0.5 * (m + m.conj().T)  # exact Hermitian start
    vecs = np.eye(n, dtype=np.complex128)

    for _ in range(_JACOBI_MAX_SWEEPS):
        # Off-diagonal Frobenius mass summed directly from the entries;
        # subtracting diag from total would cancel catastrophically.
        off = float(np.linalg.norm(work - np.diag(np.diag(work))))
        diag_norm = float(np.linalg.norm(np.diag(work)))
        if off <= _JACOBI_REL_TOL * diag_norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                # Unitary rotation annihilating the (p, q) entry: phase of
                # the pivot makes it real, then a real Jacobi angle.
                phase = apq / r
                phi = 0.5 * math.atan2(2.0 * r, work[q, q].real - work[p, p].real)
                c = math.cos(phi)
                sig = math.sin(phi) * phase
                # A <- J† A J  (columns first, then rows)
                col_p = work[:, p].copy()
                col_q = work[:, q].copy()
                work[:, p] = c * col_p - np.conj(sig) * col_q
                work[:, q] = sig * col_p + c * col_q
                row_p = work[p, :].copy()
                row_q = work[q, :].copy()
                work[p, :] = c * row_p - sig * row_q
                work[q, :] = np.conj(sig) * row_p + c * row_q
                work[p, q] = 0.0
                work[q, p] = 0.0
                # V <- V J
                vcol_p = vecs[:, p].copy()
                vcol_q = vecs[:, q].copy()
                vecs[:, p] = c * vcol_p - np.conj(sig) * vcol_q
                vecs[:, q] = sig * vcol_p + c * vcol_q
        work = 0.5 * (work + work.conj().T)
    else:
        raise NumericalError(
            f"Jacobi eigensolver did not converge in {_JACOBI_MAX_SWEEPS} sweeps"
        )

    vals = np.diag(work).real.copy()
    order = np.argsort(vals, kind="stable")
    return HermitianEig(eigenvalues=vals[order], eigenvectors=vecs[:, order])


def herm_sqrt(a) -> np.ndarray:
    """Hermitian square root B of a Hermitian positive-definite A (B·B = A).

    Computed spectrally, B = V diag(sqrt(w)) V†. The Hermitian (rather
    than Cholesky) root is used so channel draws are reproducible
    independent of factorization conventions.
    """
    eig = herm_eig(a)
    if np.min(eig.eigenvalues) <= 0.0:
        raise ValidationError(
            "herm_sqrt requires a positive-definite matrix "
            f"(min eigenvalue {np.min(eig.eigenvalues):.3e})"
        )
    v = eig.eigenvectors
    root = (v * np.sqrt(eig.eigenvalues)) @ v.conj().T
    return 0.5 * (root + root.conj().T)


def det(a) -> complex:
    """Determinant by pivoted Gaussian elimination; closed form for sizes 1-2."""
    m = as_matrix(a)
    _require_square(m, "det")
    n = m.shape[0]
    if n == 0:
        return complex(1.0)
    if n == 1:
        return complex(m[0, 0])
    if n == 2:
        return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    work = m.copy()
    sign = 1.0
    for k in range(n - 1):
        piv = k + int(np.argmax(np.abs(work[k:, k])))
        if piv != k:
            work[[k, piv], :] = work[[piv, k], :]
            sign = -sign
        pivot = work[k, k]
        if pivot == 0.0:
            return complex(0.0)
        factors = work[k + 1 :, k] / pivot
        work[k + 1 :, k:] -= np.outer(factors, work[k, k:])
    return complex(sign * np.prod(np.diag(work)))


def vandermonde(values) -> float:
    """Pairwise product prod_{i<j} (v_j - v_i); 1 for a single value."""
    vals = [float(v) for v in values]
    if len(vals) == 0:
        raise ValidationError("vandermonde requires at least one value")
    out = 1.0
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            out *= vals[j] - vals[i]
    return out
