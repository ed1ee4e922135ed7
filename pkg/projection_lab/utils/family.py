"""
Parametrized projection families λ ↦ V_λ.

Covers the bound function p(l) and the lower-bound curve, rotation-schedule
families and their JSON form, analytic Jacobians, the nondegeneracy gate,
the witness-subspace search, the extension to (m+p)-planes and the
Monte-Carlo transversality probe.
"""

import math
from fractions import Fraction
from itertools import combinations
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.special
from scipy.stats import linregress, qmc

from projection_lab.utils.errors import InputError, PreconditionError
from projection_lab.utils.grassmann import (
    CHART_LIMIT,
    ChartPoint,
    Frame,
    chart_point_frame,
    chart_spanning_vectors,
    complement,
    orthonormalize,
    projection_norms,
    projector_derivative,
    rotation_chain,
    rotation_chain_derivative,
    span_projector,
    tangent_projection_derivative,
)
from projection_lab.utils.multivec import gram_norm, wedge_operator_norm
from projection_lab.utils.utils import parallel_map, read_json, task_rng, write_json

MIN_PROBE_HITS = 16
WITNESS_PASS_TOL = 1e-6


# ---------------------------------------------------------------------------
# The bound function

def bracket_ceil(x):
    """]x]: the smallest integer q >= 0 with x <= q.

    Accepts ints, Fractions, floats or an exact (numerator, denominator) pair.
    """
    if isinstance(x, tuple):
        num, den = x
        x = Fraction(num, den)
    if isinstance(x, float) and not math.isfinite(x):
        raise InputError(f"]x] needs a finite value, got {x}")
    return max(0, math.ceil(x))


def _check_nmk(n, m, k):
    if not 0 < m < n:
        raise InputError(f"need 0 < m < n, got n={n}, m={m}")
    if not 0 < k < m * (n - m):
        raise InputError(f"need 0 < k < m(n-m) = {m * (n - m)}, got k={k}")


def p_of_l(n, m, k, l):
    """p(l) = n − m − ](k − l(n−m))/(m − l)], in exact rational arithmetic."""
    _check_nmk(n, m, k)
    if not 0 <= l <= m - 1:
        raise InputError(f"l must lie in [0, m-1] = [0, {m - 1}], got {l}")
    return n - m - bracket_ceil(Fraction(k - l * (n - m), m - l))


def dot_filling_oracle(n, m, k, l):
    """p(l) by explicit dot placement on an m × (n−m) board.

    The l lowest rows are filled first; the remaining dots fill the upper
    m − l rows column by column from the left. The result is the number of
    columns left without a dot in the upper rows.
    """
    board = np.zeros((m, n - m), dtype=bool)
    dots = k
    for row in range(l):
        for col in range(n - m):
            if dots == 0:
                break
            board[row, col] = True
            dots -= 1
    for col in range(n - m):
        for row in range(l, m):
            if dots == 0:
                break
            board[row, col] = True
            dots -= 1
    return int(np.sum(~board[l:].any(axis=0)))


def klimits_bounds(n, m, l, p):
    """(lower, upper) with lower < k <= upper required by the (l, p) regime."""
    lower = l * (n - m) + (n - m - p - 1) * (m - l)
    upper = l * (n - m) + (n - m - p) * (m - l)
    return lower, upper


@dataclass(frozen=True)
class BoundTable:
    n: int
    m: int
    k: int
    values: tuple
    breakpoints: tuple
    threshold: int

    def to_dict(self):
        return {
            "n": self.n, "m": self.m, "k": self.k,
            "p": list(self.values),
            "breakpoints": list(self.breakpoints),
            "absolute_continuity_threshold": self.threshold,
        }


def bound_table(n, m, k):
    values = tuple(p_of_l(n, m, k, l) for l in range(m))
    threshold = values[-1] + m
    points = set()
    for l, p in enumerate(values):
        points.update((p + l, p + l + 1))
    points.add(threshold)
    return BoundTable(n, m, k, values, tuple(sorted(points)), threshold)


def theorem_lower_bound(n, m, k, d):
    """Almost-sure lower bound for dim (Π_{V_λ})_*μ when dim μ = d.

    The flat branch at l = m−1 is closed by the absolute-continuity
    threshold p(m−1) + m, where p(m) is not defined.
    """
    _check_nmk(n, m, k)
    if not 0 <= d <= n:
        raise InputError(f"d must lie in [0, n] = [0, {n}], got {d}")
    table = bound_table(n, m, k)
    low = max(0.0, d - (n - m))
    high = min(float(d), float(m))
    if d > table.threshold:
        return float(m)
    candidates = [low]
    p = table.values
    for l in range(m):
        if p[l] + l <= d <= p[l] + l + 1:
            candidates.append(d - p[l])
        top = p[l + 1] + l + 1 if l + 1 < m else table.threshold
        if p[l] + l + 1 <= d <= top:
            candidates.append(float(l + 1))
    return float(min(max(candidates), high))


# ---------------------------------------------------------------------------
# Family specifications

@dataclass(frozen=True)
class ScheduleEntry:
    """Parameter `param` drives chart slot (i, j) with weight `weight` (0-based)."""

    param: int
    i: int
    j: int
    weight: float = 1.0


@dataclass(frozen=True, eq=False)
class FamilySpec:
    """Rotation-schedule family: α_ij(λ) = Σ_a w_{a,ij} λ_a on the box Π ]−r_a, r_a[."""

    n: int
    m: int
    k: int
    base: Frame
    complement: Frame
    schedule: tuple
    radii: np.ndarray = field(default=None)

    def __post_init__(self):
        n, m, k = self.n, self.m, self.k
        _check_nmk(n, m, k)
        if self.base.ambient_dim != n or self.base.plane_dim != m:
            raise InputError("FamilySpec: base frame does not match (n, m)")
        ChartPoint(self.base, self.complement, np.zeros((m, n - m)))
        seen = set()
        for entry in self.schedule:
            if not 0 <= entry.param < k:
                raise InputError(f"schedule: parameter index {entry.param} out of range for k={k}")
            if not (0 <= entry.i < m and m <= entry.j < n):
                raise InputError(f"schedule: ({entry.i}, {entry.j}) is not a slot of G({n},{m})")
            key = (entry.param, entry.i, entry.j)
            if key in seen:
                raise InputError(f"schedule: parameter {entry.param} drives slot ({entry.i}, {entry.j}) twice")
            seen.add(key)
        object.__setattr__(self, "schedule", tuple(self.schedule))
        load = np.abs(self.weights).sum(axis=0).max()
        if self.radii is None:
            radius = CHART_LIMIT / load if load > 0 else CHART_LIMIT
            radii = np.full(k, radius)
        else:
            radii = np.array(self.radii, dtype=float).ravel()
            if radii.shape != (k,) or np.any(radii <= 0):
                raise InputError(f"radii must be {k} positive numbers")
            reach = np.einsum("aij,a->ij", np.abs(self.weights), radii)
            if np.max(reach) > CHART_LIMIT * (1 + 1e-12):
                raise InputError("radii let a chart angle reach π/4; shrink the domain")
        radii.flags.writeable = False
        object.__setattr__(self, "radii", radii)

    @property
    def weights(self):
        """(k, m, n−m) tensor of slot weights."""
        W = np.zeros((self.k, self.m, self.n - self.m))
        for entry in self.schedule:
            W[entry.param, entry.i, entry.j - self.m] += entry.weight
        return W

    @property
    def coordinates(self):
        return np.vstack([self.base.basis, self.complement.basis])

    def angles(self, lams):
        return np.einsum("...a,aij->...ij", np.asarray(lams, dtype=float), self.weights)

    def to_dict(self):
        return {
            "n": self.n,
            "m": self.m,
            "k": self.k,
            "base": self.base.to_list(),
            "complement": self.complement.to_list(),
            "schedule": [
                {"param": e.param + 1, "i": e.i + 1, "j": e.j + 1, "weight": e.weight}
                for e in self.schedule
            ],
            "radii": self.radii.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        try:
            n, m, k = int(data["n"]), int(data["m"]), int(data["k"])
            raw_base = data.get("base", "standard")
            schedule = [
                ScheduleEntry(int(e["param"]) - 1, int(e["i"]) - 1, int(e["j"]) - 1,
                              float(e.get("weight", 1.0)))
                for e in data["schedule"]
            ]
        except (KeyError, TypeError, ValueError) as e:
            raise InputError(f"family specification is malformed: {e}") from e
        if raw_base == "standard":
            base = Frame.standard(n, m)
            comp = Frame(np.eye(n)[m:])
        else:
            base = Frame(np.array(raw_base, dtype=float))
            comp = Frame(np.array(data["complement"], dtype=float)) if "complement" in data else complement(base)
        return cls(n, m, k, base, comp, tuple(schedule), data.get("radii"))

    @classmethod
    def load(cls, path):
        return cls.from_dict(read_json(path))

    def save(self, path):
        return write_json(path, self.to_dict())


def standard_family(n, m, slots, radii=None):
    """One parameter per slot (0-based chart slots), standard base frame."""
    schedule = tuple(ScheduleEntry(a, i, j) for a, (i, j) in enumerate(slots))
    return FamilySpec(n, m, len(slots), Frame.standard(n, m), Frame(np.eye(n)[m:]), schedule, radii)


def random_family(n, m, k, seed, random_base=True):
    """Every parameter drives every slot with a random weight."""
    rng = np.random.default_rng(seed)
    base = Frame.random(n, m, rng) if random_base else Frame.standard(n, m)
    comp = complement(base)
    W = rng.standard_normal((k, m, n - m))
    schedule = tuple(
        ScheduleEntry(a, i, m + j, float(W[a, i, j]))
        for a in range(k) for i in range(m) for j in range(n - m)
    )
    return FamilySpec(n, m, k, base, comp, schedule)


def reparametrize(spec, Q):
    """The same planes in the coordinates λ = Q μ, for an orthogonal k×k matrix Q."""
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (spec.k, spec.k) or not np.allclose(Q.T @ Q, np.eye(spec.k), atol=1e-10):
        raise InputError(f"reparametrize: need an orthogonal {spec.k}x{spec.k} matrix")
    W = np.einsum("ab,aij->bij", Q, spec.weights)
    schedule = tuple(
        ScheduleEntry(int(b), int(i), spec.m + int(j), float(W[b, i, j]))
        for b, i, j in zip(*np.nonzero(W))
    )
    return FamilySpec(spec.n, spec.m, spec.k, spec.base, spec.complement, schedule)


def pad_family(spec):
    """Add a parameter that does not move the planes; never nondegenerate."""
    radii = np.append(spec.radii, float(np.min(spec.radii)))
    return FamilySpec(spec.n, spec.m, spec.k + 1, spec.base, spec.complement, spec.schedule, radii)


def sharpness_family(n, m, k, l, p, radii=None):
    """The dot-filling family used for the sharpness construction.

    Rows 0..l−1 rotate towards every complement direction; rows l..m−1 only
    towards the first n−m−p complement directions, filled column by column.
    """
    lower, upper = klimits_bounds(n, m, l, p)
    if not lower < k <= upper:
        raise InputError(
            f"(l={l}, p={p}, k={k}) violates {lower} = l(n-m)+(n-m-p-1)(m-l) < k "
            f"<= l(n-m)+(n-m-p)(m-l) = {upper}")
    slots = [(i, j) for i in range(l) for j in range(m, n)]
    slots += [(i, j) for j in range(m, n - p) for i in range(l, m)]
    return standard_family(n, m, [tuple(s) for s in slots[:k]], radii)


# ---------------------------------------------------------------------------
# Families as plane-valued maps

class PlaneFamily:
    """λ ↦ V_λ on the box Π ]−radii_a, radii_a[, given through spanning vectors."""

    param_dim: int
    ambient_dim: int
    plane_dim: int
    radii: np.ndarray

    def spanning(self, lams):
        """(N, plane_dim, ambient_dim) spanning vectors for a batch of parameters."""
        raise NotImplementedError

    def spanning_derivative(self, lam):
        """(param_dim, plane_dim, ambient_dim): ∂/∂λ_a of the spanning vectors."""
        raise NotImplementedError

    def contains(self, lam):
        lam = np.asarray(lam, dtype=float)
        return lam.shape[-1] == self.param_dim and bool(np.all(np.abs(lam) < self.radii))

    def check_site(self, lam):
        lam = np.asarray(lam, dtype=float).ravel()
        if not self.contains(lam):
            raise InputError(f"λ = {lam.tolist()} is outside the family domain (radii {self.radii.tolist()})")
        return lam

    def frame(self, lam):
        lam = self.check_site(lam)
        return Frame.from_vectors(self.spanning(lam[np.newaxis])[0])

    def default_ball_radius(self, lam0):
        """Half the distance from λ0 to the boundary of the domain box."""
        lam0 = self.check_site(lam0)
        return float(np.min(self.radii - np.abs(lam0)) / 2)

    def derivative_projectors(self, lam):
        """(param_dim, n, n): ∂Π_{V_λ}/∂λ_a at λ."""
        lam = self.check_site(lam)
        E = self.spanning(lam[np.newaxis])[0]
        dE = self.spanning_derivative(lam)
        return np.stack([projector_derivative(E, dE[a]) for a in range(self.param_dim)])


class RotationFamily(PlaneFamily):
    """The plane family of a FamilySpec."""

    def __init__(self, spec):
        self.spec = spec
        self.param_dim = spec.k
        self.ambient_dim = spec.n
        self.plane_dim = spec.m
        self.radii = spec.radii
        self._coordinates = spec.coordinates

    def spanning(self, lams):
        lams = np.atleast_2d(np.asarray(lams, dtype=float))
        if not np.all(np.abs(lams) < self.radii):
            raise InputError("some parameters lie outside the family domain")
        return chart_spanning_vectors(self._coordinates, self.plane_dim, self.spec.angles(lams))

    def spanning_derivative(self, lam):
        lam = self.check_site(lam)
        m, n = self.plane_dim, self.ambient_dim
        angles = self.spec.angles(lam)
        per_slot = np.zeros((m, n - m, n))
        for i in range(m):
            d = rotation_chain_derivative(angles[i])
            per_slot[i, :, i] = d[:, 0]
            per_slot[i, :, m:] = d[:, 1:]
        dE = np.einsum("aiq,iqx->aix", self.spec.weights, per_slot)
        return dE @ self._coordinates


def as_family(family):
    if isinstance(family, FamilySpec):
        return RotationFamily(family)
    if isinstance(family, PlaneFamily):
        return family
    raise InputError(f"expected a FamilySpec or PlaneFamily, got {type(family).__name__}")


def family_frame(spec, lam):
    """Frame of V_λ: the chart point with α_ij = Σ_a w_{a,ij} λ_a."""
    lam = RotationFamily(spec).check_site(lam)
    return chart_point_frame(ChartPoint(spec.base, spec.complement, spec.angles(lam)))


class ExtendedFamily(PlaneFamily):
    """λ̃ = (λ̃¹, λ̃²) ↦ ⟨V_{λ̃¹}, ê_{t+1}(λ̃²), ..., ê_{n−m}(λ̃²)⟩.

    `e_hat` holds an orthonormal basis of V_{λ0}^⊥ (ambient rows) whose first
    t rows span the witness subspace W; each of the last p rows is rotated
    towards the first t rows by its own block of t angles.
    """

    def __init__(self, original, center, e_hat, t, extra_radius=0.49):
        self.original = original
        self.center = np.asarray(center, dtype=float)
        self.e_hat = np.asarray(e_hat, dtype=float)
        self.t = t
        self.p = self.e_hat.shape[0] - t
        self.param_dim = original.param_dim + self.p * t
        self.ambient_dim = original.ambient_dim
        self.plane_dim = original.plane_dim + self.p
        self.radii = np.concatenate([original.radii, np.full(self.p * t, extra_radius)])

    def _split(self, lams):
        k = self.original.param_dim
        return lams[..., :k], lams[..., k:].reshape(lams.shape[:-1] + (self.p, self.t))

    def spanning(self, lams):
        lams = np.atleast_2d(np.asarray(lams, dtype=float))
        base_part, extra = self._split(lams)
        E = self.original.spanning(base_part)
        if self.p == 0:
            return E
        if not np.all(np.abs(extra) < self.radii[-1]):
            raise InputError("some extension angles lie outside the family domain")
        coeffs = rotation_chain(extra)
        W, tail = self.e_hat[:self.t], self.e_hat[self.t:]
        rotated = coeffs[..., :1] * tail + coeffs[..., 1:] @ W
        return np.concatenate([E, rotated], axis=1)

    def spanning_derivative(self, lam):
        lam = self.check_site(lam)
        k, m, n = self.original.param_dim, self.original.plane_dim, self.ambient_dim
        out = np.zeros((self.param_dim, self.plane_dim, n))
        out[:k, :m] = self.original.spanning_derivative(lam[:k])
        _, extra = self._split(lam)
        W, tail = self.e_hat[:self.t], self.e_hat[self.t:]
        for i in range(self.p):
            d = rotation_chain_derivative(extra[i])
            for j in range(self.t):
                out[k + i * self.t + j, m + i] = d[j, 0] * tail[i] + d[j, 1:] @ W
        return out


# ---------------------------------------------------------------------------
# Jacobians and the nondegeneracy gate

@dataclass(frozen=True, eq=False)
class FamilyJacobian:
    """A_a: V^⊥ → V for a = 1..k at a site, as m×(n−m) matrices in frame coordinates."""

    site: np.ndarray
    frame: Frame
    complement: Frame
    maps: np.ndarray

    @property
    def k(self):
        return self.maps.shape[0]

    @property
    def m(self):
        return self.maps.shape[1]

    @property
    def codim(self):
        return self.maps.shape[2]

    @property
    def flattened(self):
        return self.maps.reshape(self.k, -1)

    def images(self, z):
        """A_a(z) for z in complement coordinates; shape (..., k, m)."""
        return np.einsum("amq,...q->...am", self.maps, np.asarray(z, dtype=float))


def family_jacobian(family, lam0):
    """Analytic Jacobian maps A_a = Π_{V_{λ0}} ∘ ∂Π_{V_λ}/∂λ_a restricted to V_{λ0}^⊥."""
    fam = as_family(family)
    lam0 = fam.check_site(lam0)
    if isinstance(fam, RotationFamily) and not np.any(lam0):
        spec = fam.spec
        chart = ChartPoint(spec.base, spec.complement, np.zeros((spec.m, spec.n - spec.m)))
        F0, C0 = spec.base, spec.complement
        maps = np.zeros((spec.k, spec.m, spec.n - spec.m))
        for entry in spec.schedule:
            for col, z in enumerate(C0.basis):
                d = tangent_projection_derivative(chart, entry.i, entry.j, z)
                maps[entry.param, :, col] += entry.weight * (F0.basis @ d)
        return FamilyJacobian(lam0, F0, C0, maps)
    F0 = fam.frame(lam0)
    C0 = complement(F0)
    dP = fam.derivative_projectors(lam0)
    maps = np.einsum("mx,axy,qy->amq", F0.basis, dP, C0.basis)
    return FamilyJacobian(lam0, F0, C0, maps)


def projection_jacobian(family, lam0, z):
    """D_λΠ_{V_λ}(z) at λ0 as an n×k matrix (column a is ∂Π_{V_λ}(z)/∂λ_a)."""
    fam = as_family(family)
    dP = fam.derivative_projectors(lam0)
    return (dP @ np.asarray(z, dtype=float)).T


@dataclass(frozen=True)
class NondegeneracyResult:
    wedge_norm: float
    passed: bool


def nondegeneracy_check(family, lam0=None, tol=1e-9):
    """‖A_1 ∧ ... ∧ A_k‖ with the A_a flattened into R^{m(n−m)}; passes above `tol`."""
    fam = as_family(family)
    if lam0 is None:
        lam0 = np.zeros(fam.param_dim)
    J = family_jacobian(fam, lam0)
    if J.k > J.flattened.shape[1]:
        return NondegeneracyResult(0.0, False)
    norm = gram_norm(J.flattened)
    return NondegeneracyResult(norm, norm > tol)


def nondegeneracy_scan(family, sites, tol=1e-9):
    """Boolean mask of sites failing the check, and the failing fraction."""
    fam = as_family(family)
    failing = np.array([not nondegeneracy_check(fam, s, tol).passed for s in np.atleast_2d(sites)])
    return failing, float(failing.mean()) if failing.size else 0.0


# ---------------------------------------------------------------------------
# Witness subspaces

@dataclass(frozen=True, eq=False)
class WitnessResult:
    """Best t-dimensional W ⊂ R^{n−m} found and its empirical margin d̂′."""

    basis: np.ndarray
    d_prime_hat: float
    t: int
    l: int
    sphere_points: int
    passed: bool

    def to_dict(self):
        return {
            "t": self.t,
            "l": self.l,
            "basis": self.basis.tolist(),
            "d_prime_hat": self.d_prime_hat,
            "sphere_points": self.sphere_points,
            "passed": self.passed,
        }


def sphere_sample(t, size, seed=0):
    """Deterministic sample of directions of R^t (antipodal points identified)."""
    if t == 1:
        return np.ones((1, 1))
    if t == 2:
        theta = np.pi * np.arange(size) / size
        return np.column_stack([np.cos(theta), np.sin(theta)])
    u = qmc.Halton(d=t, scramble=True, seed=seed).random(size)
    g = scipy.special.ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _witness_score(J, W, sphere, index_sets):
    """min over sampled unit z ∈ W of max over index sets of ‖A_{j1}(z)∧...∧A_{j_{l+1}}(z)‖."""
    images = J.images(sphere @ W)
    gram = images @ np.swapaxes(images, -1, -2)
    minors = gram[:, index_sets[:, :, None], index_sets[:, None, :]]
    volumes = np.sqrt(np.clip(np.linalg.det(minors), 0.0, None))
    return float(np.min(np.max(volumes, axis=1)))


def find_witness_subspace(J, t, l, trials=200, sphere_samples=None, refine_steps=50,
                          seed=0, threads=0):
    """Heuristic search for W with uniformly large (l+1)-wedges of the A_j(z).

    Random orthonormal t-frame restarts, each followed by perturbation
    hill-climbing. A positive d̂′ certifies only the sampled directions.
    """
    q, m, k = J.codim, J.m, J.k
    if not 1 <= t <= q:
        raise InputError(f"t must lie in [1, n-m] = [1, {q}], got {t}")
    if not 0 <= l <= m - 1:
        raise InputError(f"l must lie in [0, m-1] = [0, {m - 1}], got {l}")
    needed = m * (t - 1) + l * (q - t + 1)
    if not k > needed:
        raise InputError(f"witness search needs k > m(t-1) + l(n-m-t+1) = {needed}, got k={k}")
    if sphere_samples is None:
        sphere_samples = 512 if q <= 4 else 2048
    sphere = sphere_sample(t, sphere_samples, seed)
    index_sets = np.array(list(combinations(range(k), l + 1)))

    def score(W):
        return _witness_score(J, W, sphere, index_sets)

    if t == q:
        W = np.eye(q)
        best_score = score(W)
    else:
        def restart(index):
            rng = task_rng(seed, index)
            W = orthonormalize(rng.standard_normal((t, q)))
            current = score(W)
            step = 0.5
            for _ in range(refine_steps):
                candidate = orthonormalize(W + step * rng.standard_normal((t, q)))
                value = score(candidate)
                if value > current:
                    W, current = candidate, value
                else:
                    step *= 0.8
            return current, W

        results = parallel_map(restart, range(trials), threads)
        best_score, W = results[0]
        for value, candidate in results[1:]:
            if value > best_score:
                best_score, W = value, candidate
    return WitnessResult(W, best_score, t, l, len(sphere), best_score > WITNESS_PASS_TOL)


# ---------------------------------------------------------------------------
# Extension to (m+p)-planes

@dataclass(frozen=True, eq=False)
class Extension:
    family: Optional[ExtendedFamily]
    p: int
    t: int
    r: int
    l: int
    witness: Optional[WitnessResult]
    noop: bool
    reason: str = ""

    @property
    def site(self):
        if self.family is None:
            return None
        return np.concatenate([self.family.center, np.zeros(self.family.param_dim - self.family.original.param_dim)])

    def to_dict(self):
        return {
            "l": self.l, "p": self.p, "t": self.t, "r": self.r,
            "noop": self.noop, "reason": self.reason,
            "extra_parameters": 0 if self.family is None else self.family.param_dim - self.family.original.param_dim,
            "witness": None if self.witness is None else self.witness.to_dict(),
        }


def extend_family(family, lam0, l, extra_radius=0.49, **witness_options):
    """Extended family around λ0 whose transversality order is r = l + 1 + p(l)."""
    fam = as_family(family)
    lam0 = fam.check_site(lam0)
    n, m, k = fam.ambient_dim, fam.plane_dim, fam.param_dim
    p = p_of_l(n, m, k, l)
    if p >= n - m:
        return Extension(None, p, 0, l + 1 + p, l, None, True,
                         f"p({l}) = {p} = n - m: the natural lower bound is already sharp")
    t = n - m - p
    J = family_jacobian(fam, lam0)
    witness = find_witness_subspace(J, t, l, **witness_options)
    tail = scipy.linalg.null_space(witness.basis).T
    e_hat = np.vstack([witness.basis, tail]) @ J.complement.basis
    extended = ExtendedFamily(fam, lam0, e_hat, t, extra_radius)
    return Extension(extended, p, t, l + 1 + p, l, witness, False)


def extension_wedge_margin(extension, sphere_samples=64, seed=0):
    """min over sampled unit z ∈ W of ‖∧_r D_λ̃Π_Ṽ(z)‖, against d̂′/√t^p."""
    ext = extension.family
    site = extension.site
    dP = ext.derivative_projectors(site)
    sphere = sphere_sample(extension.t, sphere_samples, seed)
    W = ext.e_hat[:extension.t]
    worst = np.inf
    for u in sphere:
        z = u @ W
        worst = min(worst, wedge_operator_norm((dP @ z).T, extension.r))
    target = extension.witness.d_prime_hat / math.sqrt(extension.t) ** extension.p
    return float(worst), float(target)


# ---------------------------------------------------------------------------
# Extended-plane derivative check

@dataclass(frozen=True, eq=False)
class DerivativeCheck:
    order: float
    passed: bool
    steps: tuple
    differences: tuple


def _path_spanning(path, s):
    value = path(s)
    return value.basis if isinstance(value, Frame) else np.atleast_2d(np.asarray(value, dtype=float))


def extended_plane_derivative_check(path, c, U, steps=(1e-1, 1e-2, 1e-3, 1e-4), z=None,
                                    samples=8, seed=0, min_order=1.9):
    """Second-order agreement of Π_{V_s}(z) and Π_{⟨V_s, U⟩}(z) near s = c.

    For z ⊥ ⟨V_c, U⟩ the gap |Π_{V_s}(z) − Π_{⟨V_s,U⟩}(z)| must vanish like
    (s − c)^2; the log-log slope over `steps` is the reported order.
    """
    Vc = Frame.from_vectors(_path_spanning(path, c))
    if np.max(np.abs(U.basis @ Vc.basis.T)) > 1e-9:
        raise InputError("U must lie inside V_c^⊥")
    joint = np.vstack([Vc.basis, U.basis])
    if z is None:
        normal = scipy.linalg.null_space(joint).T
        rng = np.random.default_rng(seed)
        zs = rng.standard_normal((samples, normal.shape[0])) @ normal
    else:
        zs = np.atleast_2d(np.asarray(z, dtype=float))
        if np.max(np.abs(zs @ joint.T)) > 1e-9 * max(1.0, np.max(np.abs(zs))):
            raise PreconditionError("z must be perpendicular to both V_c and U")

    def gap(s):
        E = _path_spanning(path, s)
        P = span_projector(E)
        P_ext = span_projector(np.vstack([E, U.basis]))
        return float(np.max(np.linalg.norm(zs @ (P - P_ext), axis=1)))

    differences = tuple(max(gap(c + h), gap(c - h)) for h in steps)
    diffs = np.array(differences)
    usable = diffs > 1e-15
    if not np.any(diffs > 1e-13):
        return DerivativeCheck(math.inf, True, tuple(steps), differences)
    if np.count_nonzero(usable) < 2:
        return DerivativeCheck(math.nan, False, tuple(steps), differences)
    fit = linregress(np.log(np.array(steps)[usable]), np.log(diffs[usable]))
    return DerivativeCheck(float(fit.slope), bool(fit.slope >= min_order), tuple(steps), differences)


# ---------------------------------------------------------------------------
# Transversality probe

@dataclass(frozen=True, eq=False)
class ProbeResult:
    deltas: np.ndarray
    fractions: np.ndarray
    hits: np.ndarray
    exponent: Optional[float]
    fit_mask: np.ndarray
    radius: float
    samples: int
    diagnostic: Optional[str] = None

    def to_dict(self):
        return {
            "deltas": self.deltas.tolist(),
            "fractions": self.fractions.tolist(),
            "hits": self.hits.tolist(),
            "exponent": self.exponent,
            "fit_mask": self.fit_mask.tolist(),
            "radius": self.radius,
            "samples": self.samples,
            "diagnostic": self.diagnostic,
        }


def _uniform_ball(rng, size, center, radius):
    k = center.shape[0]
    g = rng.standard_normal((size, k))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(size) ** (1.0 / k)
    return center + g * r[:, None]


def transversality_probe(family, lam0, w, deltas=None, samples=10 ** 6, seed=0, radius=None,
                         threads=0, chunk=1 << 16):
    """Monte-Carlo sublevel fractions of λ ∈ B(λ0, R) with |Π_{V_λ}(w)| <= δ.

    `family` is a PlaneFamily/FamilySpec or any callable returning spanning
    vectors for a batch of parameters. The exponent is the least-squares
    log-log slope over the deltas with at least MIN_PROBE_HITS hits and a
    fraction of at most 1/2.
    """
    lam0 = np.asarray(lam0, dtype=float).ravel()
    if isinstance(family, (FamilySpec, PlaneFamily)):
        fam = as_family(family)
        lam0 = fam.check_site(lam0)
        if radius is None:
            radius = fam.default_ball_radius(lam0)
        if np.any(np.abs(lam0) + radius >= fam.radii):
            raise InputError("the ball B(λ0, R) must lie inside the family domain")
        spanning = fam.spanning
    elif callable(family):
        if radius is None:
            raise InputError("radius is required when the family is a plain callable")
        spanning = family
    else:
        raise InputError(f"cannot probe a {type(family).__name__}")
    w = np.asarray(w, dtype=float).ravel()
    norm_w = np.linalg.norm(w)
    if norm_w == 0:
        raise InputError("direction w must be nonzero")
    w = w / norm_w
    if deltas is None:
        deltas = radius * np.geomspace(0.25, 2.5e-3, 13)
    deltas = np.asarray(deltas, dtype=float)
    if np.any(np.diff(deltas) >= 0) or np.any(deltas <= 0):
        raise InputError("deltas must be positive and strictly decreasing")

    sizes = [chunk] * (samples // chunk) + ([samples % chunk] if samples % chunk else [])

    def run_chunk(index):
        rng = task_rng(seed, index)
        lams = _uniform_ball(rng, sizes[index], lam0, radius)
        return projection_norms(spanning(lams), w)

    norms = np.sort(np.concatenate(parallel_map(run_chunk, range(len(sizes)), threads)))
    hits = np.searchsorted(norms, deltas, side="right")
    fractions = hits / samples
    mask = (hits >= MIN_PROBE_HITS) & (fractions <= 0.5)
    if hits[0] == 0:
        return ProbeResult(deltas, fractions, hits, None, mask, float(radius), samples,
                           "direction never near kernel")
    if np.count_nonzero(mask) < 3:
        return ProbeResult(deltas, fractions, hits, None, mask, float(radius), samples,
                           "too few resolvable deltas for a fit")
    fit = linregress(np.log(deltas[mask]), np.log(fractions[mask]))
    return ProbeResult(deltas, fractions, hits, float(fit.slope), mask, float(radius), samples)
