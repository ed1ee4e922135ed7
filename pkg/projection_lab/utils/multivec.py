"""
Exterior-algebra kernel: norms of simple r-vectors, the Cauchy-Binet oracle
and operator norms of the induced maps on r-vectors.
"""

from itertools import combinations
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from projection_lab.utils.errors import InputError, PreconditionError

DEPENDENCE_RTOL = 1e-10
ORTHOGONALITY_RTOL = 1e-9


def _as_matrix(vectors, what):
    """Stack a list of equal-length vectors into a 2-D float array."""
    if isinstance(vectors, np.ndarray):
        arr = np.array(vectors, dtype=float)
        if arr.ndim == 1:
            arr = arr[np.newaxis, :]
    else:
        rows = [np.asarray(v, dtype=float).ravel() for v in vectors]
        if not rows:
            raise InputError(f"{what}: at least one vector is required")
        lengths = {len(r) for r in rows}
        if len(lengths) != 1:
            raise InputError(f"{what}: vectors have different lengths {sorted(lengths)}")
        arr = np.vstack(rows)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InputError(f"{what}: expected a non-empty list of vectors, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{what}: entries must be finite")
    return arr


@dataclass(frozen=True, eq=False)
class SimpleMultivector:
    """v_1 ∧ ... ∧ v_r in R^n, stored as the r×n matrix D whose rows are the v_i."""

    vectors: np.ndarray

    def __post_init__(self):
        arr = _as_matrix(self.vectors, "SimpleMultivector")
        r, n = arr.shape
        if r > n:
            raise InputError(f"SimpleMultivector: r={r} vectors exceed ambient dimension n={n}")
        arr.flags.writeable = False
        object.__setattr__(self, "vectors", arr)

    @property
    def r(self):
        return self.vectors.shape[0]

    @property
    def n(self):
        return self.vectors.shape[1]


@dataclass(frozen=True, eq=False)
class LinearMap:
    """Dense linear map R^cols -> R^rows."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float)
        if arr.ndim != 2:
            raise InputError(f"LinearMap: expected a 2-D matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InputError("LinearMap: entries must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @property
    def rows(self):
        return self.entries.shape[0]

    @property
    def cols(self):
        return self.entries.shape[1]

    def apply(self, x):
        return self.entries @ np.asarray(x, dtype=float)


def _multivector(v):
    return v if isinstance(v, SimpleMultivector) else SimpleMultivector(v)


def _entries(L):
    return L.entries if isinstance(L, LinearMap) else LinearMap(L).entries


def gram_norm(v):
    """‖v_1∧...∧v_r‖ = sqrt(det(D Dᵀ)), via a pivoted QR of Dᵀ.

    Returns exactly 0.0 when the volume is below
    DEPENDENCE_RTOL · Π‖v_i‖ (linearly dependent within tolerance).
    """
    D = _multivector(v).vectors
    scale = float(np.prod(np.linalg.norm(D, axis=1)))
    if scale == 0.0:
        return 0.0
    R, _ = scipy.linalg.qr(D.T, mode="r", pivoting=True)
    volume = float(np.prod(np.abs(np.diag(R))))
    if volume <= DEPENDENCE_RTOL * scale:
        return 0.0
    return volume


def cauchy_binet_norm(v):
    """sqrt of the sum of squared maximal minors of D (oracle for gram_norm)."""
    D = _multivector(v).vectors
    r, n = D.shape
    cols = np.array(list(combinations(range(n), r)))
    minors = np.linalg.det(D[:, cols].transpose(1, 0, 2))
    return float(np.sqrt(np.sum(minors ** 2)))


def wedge_operator_norm(L, r):
    """‖∧_r L‖: the product of the r largest singular values of L."""
    A = _entries(L)
    if not isinstance(r, (int, np.integer)) or r < 1 or r > min(A.shape):
        raise InputError(f"r must be an integer in [1, {min(A.shape)}], got {r}")
    sv = scipy.linalg.svdvals(A)
    return float(np.prod(sv[:r]))


def wedge_apply(L, v):
    """∧_r L (v_1∧...∧v_r) = L v_1 ∧ ... ∧ L v_r."""
    A = _entries(L)
    D = _multivector(v).vectors
    if D.shape[1] != A.shape[1]:
        raise InputError(f"LinearMap takes vectors of length {A.shape[1]}, got {D.shape[1]}")
    return SimpleMultivector(D @ A.T)


def perp_factor_check(v, u, rtol=1e-9):
    """Whether ‖v∧u‖ = ‖v‖·‖u‖ for mutually perpendicular lists v and u."""
    V = _as_matrix(v, "perp_factor_check(v)")
    U = _as_matrix(u, "perp_factor_check(u)")
    if V.shape[1] != U.shape[1]:
        raise InputError("perp_factor_check: v and u live in different dimensions")
    inner = np.abs(V @ U.T)
    bound = ORTHOGONALITY_RTOL * np.outer(np.linalg.norm(V, axis=1), np.linalg.norm(U, axis=1))
    if np.any(inner > bound):
        raise PreconditionError("perp_factor_check: every v_i must be perpendicular to every u_j")
    joint = gram_norm(np.vstack([V, U]))
    product = gram_norm(V) * gram_norm(U)
    return bool(np.isclose(joint, product, rtol=rtol, atol=1e-12))
