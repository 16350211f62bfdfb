"""Ridged preconditioners built from deterministic subsamples.

The preconditioner is ``M = (n/m) * sum(selected x_i x_i^T) + lam * I``; its
quality against the full Gram matrix Q is summarized by the measure

    delta(M) = 1 - cond(pencil(Q, M)) / cond(Q),

which is 1 for a perfect preconditioner, 0 for any multiple of the identity,
and negative when M makes conditioning worse.  The pencil condition number is
always computed by Cholesky congruence (triangular solves), never by forming
an inverse square root.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SingularMatrix
from .linalg import (
    SINGULAR_RTOL,
    CholeskyFactor,
    as_matrix,
    cholesky,
    cond_spd,
    gram,
    row_sq_norms,
    solve_spd,
    sym_eigvals,
)
from .sketch import SubsampleMask

__all__ = [
    "LambdaRule",
    "Preconditioner",
    "build_m",
    "pencil_eigvals",
    "pencil_cond",
    "delta_from_matrix",
    "delta_measure",
    "trace_inverse_bound",
    "hs_covariance_trace_bound",
]

_COEFFICIENTS = {"concentrated": 0.1, "heavy_tailed": 0.4}


@dataclass(frozen=True)
class LambdaRule:
    """Rule of thumb for the ridge weight.

    ``concentrated`` data get 0.1 * sum of squared row norms, ``heavy_tailed``
    data 0.4 * the same sum; ``explicit`` passes a value through unchanged.
    """

    profile: str
    explicit: float = 0.0

    def __post_init__(self):
        if self.profile not in ("concentrated", "heavy_tailed", "explicit"):
            raise ValueError(f"unknown lambda profile {self.profile!r}")

    @property
    def coefficient(self) -> float:
        return _COEFFICIENTS.get(self.profile, 0.0)

    def resolve(self, x) -> float:
        """Ridge weight for a data matrix."""
        if self.profile == "explicit":
            return float(self.explicit)
        return self.coefficient * float(row_sq_norms(x).sum())

    @classmethod
    def for_distribution(cls, dist: str) -> "LambdaRule":
        """Default profile per covariate family: normal data are concentrated,
        the lognormal / t2 / mixture families are heavy-tailed."""
        return cls("concentrated" if dist == "normal" else "heavy_tailed")


@dataclass(frozen=True)
class Preconditioner:
    """Ridged masked-Gram preconditioner with its Cholesky factor."""

    mask: SubsampleMask
    lam: float
    m_matrix: np.ndarray
    factor: CholeskyFactor

    def solve(self, b):
        """Apply M^{-1} to a vector (or stacked columns)."""
        return solve_spd(self.factor, b)


def build_m(x, mask: SubsampleMask, lam: float) -> Preconditioner:
    """Assemble and factor ``M = (n/m) * masked Gram + lam * I``.

    Only the m selected rows are touched, so construction is O(m d^2).
    Raises :class:`NotPositiveDefinite` when ``lam == 0`` and the selected
    rows are rank deficient.
    """
    x = as_matrix(x)
    if lam < 0:
        raise ValueError(f"ridge weight must be >= 0, got {lam}")
    n, d = x.shape
    selected = x[mask.indices]
    m_matrix = (n / mask.m) * gram(selected) + lam * np.eye(d)
    return Preconditioner(mask, float(lam), m_matrix, cholesky(m_matrix))


def pencil_eigvals(m_matrix, q, factor: CholeskyFactor | None = None) -> np.ndarray:
    """Eigenvalues of the SPD pencil (Q, M), ascending.

    Computed as the spectrum of L^{-1} Q L^{-T} where M = L L^T, which shares
    eigenvalues with M^{-1} Q but stays symmetric.
    """
    q = as_matrix(q)
    fac = factor if factor is not None else cholesky(m_matrix)
    lower = fac.lower
    half = scipy.linalg.solve_triangular(lower, q, lower=True)
    b = scipy.linalg.solve_triangular(lower, half.T, lower=True)
    return sym_eigvals((b + b.T) * 0.5)


def pencil_cond(m_matrix, q, factor: CholeskyFactor | None = None) -> float:
    """Condition number of the pencil (Q, M)."""
    ev = pencil_eigvals(m_matrix, q, factor)
    if ev[-1] <= 0.0 or ev[0] <= SINGULAR_RTOL * ev[-1]:
        raise SingularMatrix("preconditioned Gram pencil is numerically singular")
    return float(ev[-1] / ev[0])


def delta_from_matrix(m_matrix, q, factor: CholeskyFactor | None = None) -> float:
    """Conditioning-improvement measure of an arbitrary SPD matrix against Q."""
    return 1.0 - pencil_cond(m_matrix, q, factor) / cond_spd(q)


def delta_measure(pre: Preconditioner, q) -> float:
    """Conditioning-improvement measure of a preconditioner; <= 1, may be
    negative, scale-invariant in M, and exactly 0 for M proportional to I."""
    return delta_from_matrix(pre.m_matrix, q, pre.factor)


def _bound_pieces(x, mask: SubsampleMask, c_lower: float):
    if c_lower <= 0:
        raise ValueError(f"c_lower must be > 0, got {c_lower}")
    x = as_matrix(x)
    ev = sym_eigvals(gram(x))
    if ev[-1] <= 0.0 or ev[0] <= SINGULAR_RTOL * ev[-1]:
        raise SingularMatrix("Gram matrix is numerically singular")
    kappa = float(ev[-1] / ev[0])
    excluded = float(row_sq_norms(x)[mask.delta == 0].sum())
    d = x.shape[1]
    return float(ev[0]), kappa, d + kappa / c_lower * excluded


def trace_inverse_bound(x, mask: SubsampleMask, c_lower: float) -> float:
    """Upper bound on trace of the inverse *unscaled* masked Gram matrix.

    ``c_lower`` must be a positive lower bound on the smallest eigenvalue of
    the masked Gram (callers typically pass that eigenvalue itself, which
    gives the tightest valid bound).  The bound grows with the total squared
    norm of the rows left out, which is what makes picking the largest-norm
    rows a good surrogate for minimizing average estimator variance.
    """
    lam_min, _, bracket = _bound_pieces(x, mask, c_lower)
    return bracket / lam_min


def hs_covariance_trace_bound(x, mask: SubsampleMask, c_lower: float) -> float:
    """Upper bound on trace of M^{-1} Q M^{-1} for the (n/m)-scaled masked
    Gram M, i.e. the covariance scale of a Hessian-sketched estimator.

    ``c_lower`` has the same meaning as in :func:`trace_inverse_bound` (a
    lower bound on the smallest eigenvalue of the *unscaled* masked Gram);
    since m <= n, the (n/m) scaling only slackens the inequality.
    """
    lam_min, kappa, bracket = _bound_pieces(x, mask, c_lower)
    return kappa / lam_min * bracket**2
