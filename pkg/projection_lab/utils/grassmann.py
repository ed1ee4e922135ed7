"""
Concrete Grassmannian geometry: orthonormal frames, the rotation chart
V(α) = ⟨e_1(α), ..., e_m(α)⟩ around a base plane, projectors, their analytic
derivatives and principal-angle distances.

Index convention: Python indices are 0-based. A chart slot (i, j) has
0 <= i < m (base vector) and m <= j < n (complement vector) in the chart's
coordinate system, which lists the base frame first and its complement after.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from projection_lab.utils.errors import InputError, PreconditionError
from projection_lab.utils.multivec import LinearMap

ORTHONORMAL_TOL = 1e-10
CHART_LIMIT = np.pi / 4


def orthonormalize(vectors):
    """Orthonormal rows spanning the same flag as the given rows.

    Gram-Schmidt order is preserved: the first output row is the first input
    row normalized, and so on (QR with the signs of R's diagonal made positive).
    """
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    Q, R = np.linalg.qr(V.T)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return (Q * signs).T


@dataclass(frozen=True, eq=False)
class Frame:
    """Orthonormal basis (rows of an m×n array) of a point of G(n, m)."""

    basis: np.ndarray

    def __post_init__(self):
        B = np.array(self.basis, dtype=float)
        if B.ndim == 1:
            B = B[np.newaxis, :]
        if B.ndim != 2:
            raise InputError(f"Frame: basis must be an m×n array, got shape {B.shape}")
        m, n = B.shape
        if not 1 <= m < n:
            raise InputError(f"Frame: need 1 <= m < n, got m={m}, n={n}")
        if not np.all(np.isfinite(B)):
            raise InputError("Frame: basis entries must be finite")
        drift = np.max(np.abs(B @ B.T - np.eye(m)))
        if drift > ORTHONORMAL_TOL:
            raise InputError(f"Frame: basis is not orthonormal (max Gram deviation {drift:.3e})")
        B.flags.writeable = False
        object.__setattr__(self, "basis", B)

    @property
    def ambient_dim(self):
        return self.basis.shape[1]

    @property
    def plane_dim(self):
        return self.basis.shape[0]

    @classmethod
    def standard(cls, n, m):
        """span(e_1, ..., e_m) in R^n."""
        return cls(np.eye(n)[:m])

    @classmethod
    def from_vectors(cls, vectors):
        """Frame of the span of linearly independent vectors."""
        return cls(orthonormalize(vectors))

    @classmethod
    def random(cls, n, m, rng):
        """Uniformly distributed point of G(n, m)."""
        return cls.from_vectors(rng.standard_normal((m, n)))

    def to_list(self):
        return self.basis.tolist()


def complement(f):
    """Orthonormal frame of the orthogonal complement V^⊥."""
    return Frame(scipy.linalg.null_space(f.basis).T)


def projector_matrix(basis):
    B = np.asarray(basis, dtype=float)
    return B.T @ B


def projector(f):
    """Π_V = Σ b_i b_iᵀ as an n×n map (kept as a map into R^n)."""
    return LinearMap(projector_matrix(f.basis))


def span_projector(E):
    """Projector onto the row span of a (not necessarily orthonormal) spanning set."""
    E = np.asarray(E, dtype=float)
    return E.T @ np.linalg.solve(E @ E.T, E)


def rotate(x, i, j, beta):
    """R^{ij}(β) x: rotate in the (i, j) coordinate plane, turning e_i towards e_j."""
    if i == j:
        raise InputError("rotate: i and j must differ")
    x = np.array(x, dtype=float)
    n = x.shape[-1]
    if not (0 <= i < n and 0 <= j < n):
        raise InputError(f"rotate: indices ({i}, {j}) out of range for dimension {n}")
    c, s = np.cos(beta), np.sin(beta)
    xi, xj = x[..., i].copy(), x[..., j].copy()
    x[..., i] = xi * c - xj * s
    x[..., j] = xi * s + xj * c
    return x


def rotation_chain(angles):
    """Coefficients of a unit vector rotated successively towards J targets.

    Rotating e towards targets t_1, ..., t_J (applied in that order, t_1
    first) by angles a_1, ..., a_J gives
        c_self e + Σ_j c_j t_j,  c_self = Π cos a_j,  c_j = sin a_j Π_{j'<j} cos a_j'.
    `angles` has shape (..., J); the result has shape (..., 1 + J) with c_self first.
    """
    A = np.asarray(angles, dtype=float)
    C, S = np.cos(A), np.sin(A)
    running = np.cumprod(C, axis=-1)
    before = np.concatenate([np.ones(A.shape[:-1] + (1,)), running[..., :-1]], axis=-1)
    return np.concatenate([running[..., -1:], S * before], axis=-1)


def rotation_chain_derivative(angles):
    """d(rotation_chain)/d a_q for a single chain; shape (J, 1 + J), row q."""
    A = np.asarray(angles, dtype=float)
    if A.ndim != 1:
        raise InputError("rotation_chain_derivative: expects one chain of angles")
    J = A.shape[0]
    C, S = np.cos(A), np.sin(A)
    out = np.zeros((J, 1 + J))
    for q in range(J):
        others = np.prod(np.delete(C, q))
        out[q, 0] = -S[q] * others
        for j in range(q, J):
            if j == q:
                out[q, 1 + j] = C[j] * np.prod(C[:j])
            else:
                prefix = np.prod(np.delete(C[:j], q))
                out[q, 1 + j] = -S[j] * S[q] * prefix
    return out


@dataclass(frozen=True, eq=False)
class ChartPoint:
    """Rotation chart around `base` (with its stored complement) at angles α (m×(n−m))."""

    base: Frame
    complement: Frame
    angles: np.ndarray

    def __post_init__(self):
        m, n = self.base.plane_dim, self.base.ambient_dim
        if self.complement.ambient_dim != n or self.complement.plane_dim != n - m:
            raise InputError("ChartPoint: complement frame has the wrong dimensions")
        if np.max(np.abs(self.base.basis @ self.complement.basis.T)) > ORTHONORMAL_TOL:
            raise InputError("ChartPoint: complement is not orthogonal to the base frame")
        A = np.array(self.angles, dtype=float)
        if A.shape != (m, n - m):
            raise InputError(f"ChartPoint: angles must have shape {(m, n - m)}, got {A.shape}")
        check_chart_angles(A)
        A.flags.writeable = False
        object.__setattr__(self, "angles", A)

    @classmethod
    def at(cls, base, angles=None):
        m, n = base.plane_dim, base.ambient_dim
        if angles is None:
            angles = np.zeros((m, n - m))
        return cls(base, complement(base), angles)

    @property
    def coordinates(self):
        """n×n orthogonal matrix whose rows are the base frame followed by the complement."""
        return np.vstack([self.base.basis, self.complement.basis])


def check_chart_angles(angles):
    A = np.asarray(angles)
    if A.size and np.max(np.abs(A)) >= CHART_LIMIT:
        raise InputError(f"chart angles must satisfy |α_ij| < π/4, got max {np.max(np.abs(A)):.6f}")


def chart_spanning_vectors(coordinates, m, angles):
    """Ambient vectors e_1(α), ..., e_m(α) for a batch of angle arrays.

    `coordinates` is the n×n chart basis (rows), `angles` has shape
    (N, m, n−m). The vectors span V(α) but are not mutually orthogonal.
    """
    Q = np.asarray(coordinates, dtype=float)
    A = np.asarray(angles, dtype=float)
    N = A.shape[0]
    n = Q.shape[0]
    coeffs = rotation_chain(A)
    X = np.zeros((N, m, n))
    X[:, np.arange(m), np.arange(m)] = coeffs[..., 0]
    X[:, :, m:] = coeffs[..., 1:]
    return X @ Q


def chart_point_frame(c):
    """Frame of V(α) = ⟨e_1(α), ..., e_m(α)⟩; exactly the base frame at α = 0."""
    if not np.any(c.angles):
        return c.base
    E = chart_spanning_vectors(c.coordinates, c.base.plane_dim, c.angles[np.newaxis])[0]
    return Frame.from_vectors(E)


def tangent_projection_derivative(c, i, j, z):
    """∂Π_{V(α)}(z)/∂α_ij at α = 0 of the chart `c`.

    With z = w + z⊥ split along V and V^⊥ (chart coordinates), the derivative
    is z⊥_j e_i + w_i e_j. Returned in ambient coordinates.
    """
    if np.any(c.angles):
        raise PreconditionError("tangent_projection_derivative is evaluated at α = 0 of the chart")
    m, n = c.base.plane_dim, c.base.ambient_dim
    if not (0 <= i < m and m <= j < n):
        raise InputError(f"slot ({i}, {j}) is not a chart slot for m={m}, n={n}")
    Q = c.coordinates
    y = Q @ np.asarray(z, dtype=float)
    out = np.zeros(n)
    out[i] += y[j]
    out[j] += y[i]
    return Q.T @ out


def projector_derivative(E, E_dot):
    """d/ds of the projector onto span(E(s)) given E and dE/ds.

    (I − P) Ėᵀ G⁻¹ E + Eᵀ G⁻¹ Ė (I − P) with G = E Eᵀ and P the projector.
    """
    E = np.asarray(E, dtype=float)
    E_dot = np.asarray(E_dot, dtype=float)
    n = E.shape[1]
    G_inv_E = np.linalg.solve(E @ E.T, E)
    residual = np.eye(n) - E.T @ G_inv_E
    left = residual @ E_dot.T @ G_inv_E
    return left + left.T


def projection_norms(E, w):
    """|Π_{span E_s}(w)| for a batch of spanning sets E with shape (N, d, n)."""
    E = np.asarray(E, dtype=float)
    w = np.asarray(w, dtype=float)
    b = E @ w
    G = E @ np.swapaxes(E, -1, -2)
    x = np.linalg.solve(G, b[..., np.newaxis])[..., 0]
    return np.sqrt(np.clip(np.sum(b * x, axis=-1), 0.0, None))


def subspace_distance(f1, f2):
    """Largest principal angle between two planes of the same dimension."""
    if f1.ambient_dim != f2.ambient_dim or f1.plane_dim != f2.plane_dim:
        raise InputError("subspace_distance: frames must have equal ambient and plane dimensions")
    B1, B2 = f1.basis, f2.basis
    cosines = scipy.linalg.svdvals(B1 @ B2.T)
    sines = scipy.linalg.svdvals(B2 - B2 @ B1.T @ B1)
    return float(np.arctan2(np.max(sines), np.min(cosines)))
