"""Sketching operators: SRHT, leverage-score and uniform row sampling, and
deterministic norm-based subsample masks.

Randomized operators take a ``numpy.random.Generator`` (PCG64 under
``numpy.random.default_rng``; the algorithm is documented and versioned by
numpy, which is what makes the benchmark tables reproducible across runs).
A generator is single-owner: parallel replications must each derive their own
stream via :func:`derive_rng` rather than sharing one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadSubsampleSize, DimensionMismatch, NotEnoughRows, NotPowerOfTwo
from .linalg import as_matrix, as_vector, orthonormal_colbasis, row_sq_norms

__all__ = [
    "SketchKind",
    "SubsampleMask",
    "derive_rng",
    "fwht",
    "srht_apply",
    "leverage_scores",
    "leverage_sample",
    "uniform_sample",
    "aopt_select",
    "mask_to_sketch",
    "draw_sketch",
]

VARIANTS = ("srht", "leverage", "uniform", "aopt")


def derive_rng(*key: int) -> np.random.Generator:
    """Independent PCG64 stream keyed by a tuple of integers.

    Identical keys yield identical streams; distinct keys yield statistically
    independent streams (numpy SeedSequence hashing).
    """
    return np.random.default_rng(list(key))


@dataclass(frozen=True)
class SketchKind:
    """A sketch family plus its target row count ``m``."""

    variant: str
    m: int

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown sketch variant {self.variant!r}")
        if self.m < 1:
            raise BadSubsampleSize(f"sketch size must be >= 1, got {self.m}")


@dataclass(frozen=True)
class SubsampleMask:
    """Binary row-selection vector with exactly ``m`` ones."""

    delta: np.ndarray
    m: int

    def __post_init__(self):
        delta = np.asarray(self.delta, dtype=np.uint8)
        if delta.ndim != 1 or not np.isin(delta, (0, 1)).all():
            raise BadSubsampleSize("mask must be a 1-D 0/1 vector")
        if int(delta.sum()) != self.m:
            raise BadSubsampleSize(
                f"mask has {int(delta.sum())} ones but m = {self.m}"
            )
        object.__setattr__(self, "delta", delta)

    @property
    def n(self) -> int:
        return self.delta.size

    @property
    def indices(self) -> np.ndarray:
        """Selected row indices, ascending."""
        return np.flatnonzero(self.delta)

    @classmethod
    def from_indices(cls, indices, n: int) -> "SubsampleMask":
        delta = np.zeros(n, dtype=np.uint8)
        delta[np.asarray(indices, dtype=np.intp)] = 1
        return cls(delta, int(delta.sum()))


def _hadamard_columns(a: np.ndarray) -> np.ndarray:
    # unnormalized Walsh-Hadamard butterfly down axis 0; a.shape[0] must be 2**p
    n, k = a.shape
    h = 1
    while h < n:
        a = a.reshape(n // (2 * h), 2, h, k)
        x, y = a[:, 0], a[:, 1]
        a = np.concatenate((x + y, x - y), axis=1).reshape(n, k)
        h *= 2
    return a


def fwht(v) -> np.ndarray:
    """Orthonormal fast Walsh-Hadamard transform, O(n log n).

    The transform matrix is the 1/sqrt(n)-scaled Walsh-Hadamard matrix, so
    ``fwht`` is an involution and an isometry.
    """
    v = as_vector(v)
    n = v.size
    if n < 1 or (n & (n - 1)) != 0:
        raise NotPowerOfTwo(f"length {n} is not a power of two")
    return _hadamard_columns(v[:, None].copy())[:, 0] / np.sqrt(n)


def _next_pow2(n: int) -> int:
    return 1 << (n - 1).bit_length() if n > 1 else 1


def rademacher(rng: np.random.Generator, n: int) -> np.ndarray:
    """Vector of i.i.d. +-1 signs."""
    return rng.integers(0, 2, n).astype(np.float64) * 2.0 - 1.0


def _srht_from_parts(xy_pad: np.ndarray, signs: np.ndarray, rows: np.ndarray, m: int):
    # core of the SRHT given the sign diagonal and sampled row indices
    n_pad = xy_pad.shape[0]
    w = _hadamard_columns(signs[:, None] * xy_pad) / np.sqrt(n_pad)
    return np.sqrt(n_pad / m) * w[rows]


def srht_apply(x, y, m: int, rng: np.random.Generator):
    """Subsampled randomized Hadamard transform of a data pair ``(X, y)``.

    Rows of X (and y alongside) are zero-padded to the next power of two
    n_pad, hit with a random +-1 diagonal and the orthonormal Walsh-Hadamard
    transform, then ``m`` distinct rows are kept uniformly at random and
    scaled by sqrt(n_pad / m).  The scale uses n_pad, not n, so the full
    sketch m = n_pad is an exact isometry on the padded space.

    Returns ``(SX, Sy)``.  Draw order is fixed (signs, then rows) so a seeded
    generator reproduces the sketch exactly.
    """
    x = as_matrix(x)
    y = as_vector(y)
    n, d = x.shape
    if y.size != n:
        raise DimensionMismatch(f"y has length {y.size}, X has {n} rows")
    n_pad = _next_pow2(n)
    if not 1 <= m <= n_pad:
        raise NotEnoughRows(f"sketch size {m} not in 1..{n_pad} (padded rows)")
    xy = np.zeros((n_pad, d + 1))
    xy[:n, :d] = x
    xy[:n, d] = y
    signs = rademacher(rng, n_pad)
    rows = rng.choice(n_pad, size=m, replace=False)
    s = _srht_from_parts(xy, signs, rows, m)
    return np.ascontiguousarray(s[:, :d]), np.ascontiguousarray(s[:, d])


def leverage_scores(x) -> np.ndarray:
    """Statistical leverage of each row: squared row norms of an orthonormal
    column basis.  Scores lie in [0, 1] and sum to the column count."""
    u = orthonormal_colbasis(x)
    return row_sq_norms(u)


def leverage_sample(x, y, m: int, rng: np.random.Generator):
    """Leverage-score row sampling, i.i.d. with replacement.

    Row i is drawn with probability p_i proportional to its leverage score
    and rescaled by 1/sqrt(m p_i), making S.T @ S unbiased for the identity.
    """
    x = as_matrix(x)
    y = as_vector(y)
    if y.size != x.shape[0]:
        raise DimensionMismatch(f"y has length {y.size}, X has {x.shape[0]} rows")
    if m < 1:
        raise BadSubsampleSize(f"sketch size must be >= 1, got {m}")
    scores = leverage_scores(x)
    p = scores / scores.sum()
    idx = rng.choice(x.shape[0], size=m, replace=True, p=p)
    scale = 1.0 / np.sqrt(m * p[idx])
    return x[idx] * scale[:, None], y[idx] * scale


def uniform_sample(x, y, m: int, rng: np.random.Generator):
    """Uniform row sampling without replacement, scaled by sqrt(n/m)."""
    x = as_matrix(x)
    y = as_vector(y)
    n = x.shape[0]
    if y.size != n:
        raise DimensionMismatch(f"y has length {y.size}, X has {n} rows")
    if not 1 <= m <= n:
        raise NotEnoughRows(f"sketch size {m} not in 1..{n}")
    idx = rng.choice(n, size=m, replace=False)
    scale = np.sqrt(n / m)
    return scale * x[idx], scale * y[idx]


def aopt_select(x, m: int) -> SubsampleMask:
    """Deterministic mask selecting the ``m`` rows of largest squared norm.

    Ties at the threshold norm are broken toward the smaller row index, so
    identical inputs always give identical masks regardless of thread count.
    Selection uses a partial partition (expected O(n)) rather than a full sort.
    """
    x = as_matrix(x)
    n = x.shape[0]
    if not 1 <= m <= n:
        raise BadSubsampleSize(f"subsample size {m} not in 1..{n}")
    if m == n:
        return SubsampleMask(np.ones(n, dtype=np.uint8), n)
    sq = row_sq_norms(x)
    threshold = np.partition(sq, n - m)[n - m]
    delta = np.zeros(n, dtype=np.uint8)
    above = sq > threshold
    delta[above] = 1
    need = m - int(above.sum())
    if need > 0:
        ties = np.flatnonzero(sq == threshold)
        delta[ties[:need]] = 1
    return SubsampleMask(delta, m)


def mask_to_sketch(x, mask: SubsampleMask) -> np.ndarray:
    """Materialize the m x d sketched matrix of a subsample mask.

    The selected rows are scaled by 1/sqrt(m) so the sketched Gram matrix is
    the masked row-outer-product sum divided by m.
    """
    x = as_matrix(x)
    if mask.n != x.shape[0]:
        raise DimensionMismatch(f"mask length {mask.n} != row count {x.shape[0]}")
    return x[mask.indices] / np.sqrt(mask.m)


def draw_sketch(x, y, kind: SketchKind, rng: np.random.Generator | None):
    """Produce ``(SX, Sy)`` for any sketch family.

    The ``aopt`` variant is deterministic and ignores ``rng``.  Its rows are
    scaled by sqrt(n/m) so the sketched Gram matrix equals the (n/m)-weighted
    masked sum, the scale that keeps the deterministic sketch consistent on
    the Hessian side (estimators that cancel row scaling, like the classical
    sketch, are unaffected).
    """
    if kind.variant == "srht":
        return srht_apply(x, y, kind.m, rng)
    if kind.variant == "leverage":
        return leverage_sample(x, y, kind.m, rng)
    if kind.variant == "uniform":
        return uniform_sample(x, y, kind.m, rng)
    x = as_matrix(x)
    y = as_vector(y)
    mask = aopt_select(x, kind.m)
    scale = np.sqrt(x.shape[0] / mask.m)
    return scale * x[mask.indices], scale * y[mask.indices]
