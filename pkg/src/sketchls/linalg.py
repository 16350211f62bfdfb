"""Dense linear-algebra kernels for desk-scale problems (n <= 2**17, d <= 200).

Everything here is a pure function of its inputs; matrices are plain float64
``numpy`` arrays in row-major order.  All linear systems in this library are
symmetric positive definite, so solves go through Cholesky factorizations and
there is no general LU path.  The kernels are backed by LAPACK (via numpy and
scipy); results are deterministic for a fixed BLAS build.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotPositiveDefinite, RankDeficient, SingularMatrix

__all__ = [
    "CholeskyFactor",
    "as_matrix",
    "as_vector",
    "gram",
    "cholesky",
    "solve_spd",
    "sym_eigvals",
    "cond_spd",
    "orthonormal_colbasis",
    "row_sq_norms",
    "spectral_norm",
]

#: relative eigenvalue floor below which an SPD matrix is treated as singular
SINGULAR_RTOL = 1e-14


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite float64 2-D array."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains non-finite entries")
    return a


def as_vector(x, name: str = "vector") -> np.ndarray:
    """Coerce to a finite float64 1-D array."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains non-finite entries")
    return a


def _require_symmetric(a: np.ndarray, name: str, rtol: float = 1e-12) -> None:
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    scale = np.abs(a).max() if a.size else 0.0
    if scale and np.abs(a - a.T).max() > rtol * scale:
        raise ValueError(f"{name} is not symmetric to relative tolerance {rtol:g}")


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular factor L with L @ L.T equal to the factored matrix."""

    lower: np.ndarray

    @property
    def dim(self) -> int:
        return self.lower.shape[0]


def gram(x) -> np.ndarray:
    """Gram matrix X.T @ X, symmetrized to guard against rounding skew."""
    x = as_matrix(x)
    g = x.T @ x
    return (g + g.T) * 0.5


def cholesky(a) -> CholeskyFactor:
    """Factor a symmetric positive definite matrix.

    Raises :class:`NotPositiveDefinite` when factorization breaks down or a
    pivot falls at/below the scaling-aware floor ``dim * eps * max |a_ii|``,
    which signals a rank-deficient Gram matrix or preconditioner.
    """
    a = as_matrix(a)
    _require_symmetric(a, "matrix")
    try:
        lower = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("matrix is not positive definite") from None
    floor = a.shape[0] * np.finfo(np.float64).eps * np.abs(np.diag(a)).max()
    if (np.diag(lower) ** 2 <= floor).any():
        raise NotPositiveDefinite(
            f"pivot at/below positive-definiteness floor {floor:.3e}"
        )
    return CholeskyFactor(lower)


def solve_spd(fac: CholeskyFactor, b):
    """Solve A x = b given the Cholesky factor of A.

    ``b`` may be a vector or a matrix of stacked right-hand sides (columns).
    """
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != fac.dim:
        raise DimensionMismatch(
            f"factor dimension {fac.dim} does not match rhs length {b.shape[0]}"
        )
    y = scipy.linalg.solve_triangular(fac.lower, b, lower=True)
    return scipy.linalg.solve_triangular(fac.lower, y, lower=True, trans="T")


def sym_eigvals(a) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, sorted ascending."""
    a = as_matrix(a)
    _require_symmetric(a, "matrix")
    return np.linalg.eigvalsh(a)


def cond_spd(a) -> float:
    """Condition number max-eig / min-eig of a symmetric positive definite matrix."""
    ev = sym_eigvals(a)
    if ev[-1] <= 0.0 or ev[0] <= SINGULAR_RTOL * ev[-1]:
        raise SingularMatrix(
            f"matrix is numerically singular (eigenvalue range [{ev[0]:.3e}, {ev[-1]:.3e}])"
        )
    return float(ev[-1] / ev[0])


def orthonormal_colbasis(x) -> np.ndarray:
    """Orthonormal basis of the column space, via Householder QR.

    Raises :class:`RankDeficient` when a diagonal entry of R is negligible
    relative to the Frobenius norm of the input.
    """
    x = as_matrix(x)
    n, d = x.shape
    if n < d:
        raise RankDeficient(f"need rows >= cols for a column basis, got {n} x {d}")
    q, r = np.linalg.qr(x, mode="reduced")
    scale = np.linalg.norm(x)
    if scale == 0.0 or (np.abs(np.diag(r)) <= 1e-12 * scale).any():
        raise RankDeficient("matrix does not have full column rank")
    return q


def row_sq_norms(x) -> np.ndarray:
    """Squared Euclidean norm of each row."""
    x = as_matrix(x)
    return np.einsum("ij,ij->i", x, x)


def spectral_norm(a) -> float:
    """Largest absolute eigenvalue of a symmetric matrix."""
    ev = sym_eigvals(a)
    if ev.size == 0:
        return 0.0
    return float(max(abs(ev[0]), abs(ev[-1])))
