"""
Measure generators: four-corner and line Cantor measures (deterministic IFS
iterates), seeded Lebesgue balls, atoms, and products/embeddings into R^n.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from projection_lab.utils.errors import InputError
from projection_lab.utils.grassmann import Frame
from projection_lab.utils.utils import check_file_exists, write_json

SUPPORT_RADIUS = 2.0
MASS_TOL = 1e-12
FOUR_CORNER_MAX_LEVEL = 12
LINE_CANTOR_MAX_LEVEL = 24

VARIANTS = ("four_corner_cantor", "line_cantor", "lebesgue_ball", "atom", "product", "embedded")


# ---------------------------------------------------------------------------
# Specifications

@dataclass(frozen=True)
class Placement:
    """A factor of a product measure and the orthonormal rows it is embedded along."""

    measure: "MeasureSpec"
    frame: tuple
    offset: Optional[tuple] = None

    def to_dict(self):
        out = {"measure": self.measure.to_dict(), "frame": [list(r) for r in self.frame]}
        if self.offset is not None:
            out["offset"] = list(self.offset)
        return out


@dataclass(frozen=True)
class MeasureSpec:
    """Description of a generator measure; `generate` turns it into a SampledMeasure.

    `frame` is a tuple of row tuples or the string "generic" (a seeded random
    orthonormal embedding) for the `embedded` variant.
    """

    variant: str
    level: Optional[int] = None
    s: Optional[float] = None
    dim: Optional[int] = None
    n_points: Optional[int] = None
    seed: int = 0
    inner: Optional["MeasureSpec"] = None
    frame: object = None
    offset: Optional[tuple] = None
    ambient_dim: Optional[int] = None
    parts: tuple = field(default=())

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InputError(f"unknown measure variant '{self.variant}' (expected one of {', '.join(VARIANTS)})")

    @property
    def ambient(self):
        """Dimension of the space the generated points live in."""
        if self.variant == "four_corner_cantor":
            return 2
        if self.variant == "line_cantor":
            return 1
        if self.variant in ("lebesgue_ball", "atom"):
            return int(self.dim or 1)
        return int(self.ambient_dim)

    def to_dict(self):
        out = {"variant": self.variant}
        for key in ("level", "s", "dim", "n_points", "ambient_dim"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        if self.variant in ("lebesgue_ball", "product", "embedded"):
            out["seed"] = self.seed
        if self.inner is not None:
            out["inner"] = self.inner.to_dict()
        if self.frame is not None:
            out["frame"] = self.frame if isinstance(self.frame, str) else [list(r) for r in self.frame]
        if self.offset is not None:
            out["offset"] = list(self.offset)
        if self.parts:
            out["parts"] = [p.to_dict() for p in self.parts]
        return out

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict) or "variant" not in data:
            raise InputError("measure specification must be an object with a 'variant' field")
        frame = data.get("frame")
        if frame is not None and not isinstance(frame, str):
            frame = tuple(tuple(float(x) for x in row) for row in frame)
        offset = data.get("offset")
        parts = tuple(
            Placement(cls.from_dict(p["measure"]),
                      tuple(tuple(float(x) for x in row) for row in p["frame"]),
                      tuple(p["offset"]) if p.get("offset") is not None else None)
            for p in data.get("parts", ())
        )
        return cls(
            variant=data["variant"],
            level=data.get("level"),
            s=data.get("s"),
            dim=data.get("dim"),
            n_points=data.get("n_points"),
            seed=int(data.get("seed", 0)),
            inner=cls.from_dict(data["inner"]) if "inner" in data else None,
            frame=frame,
            offset=tuple(float(x) for x in offset) if offset is not None else None,
            ambient_dim=data.get("ambient_dim"),
            parts=parts,
        )

    def generate(self):
        return generate(self)


@dataclass(frozen=True, eq=False)
class SampledMeasure:
    """N weighted points in R^n approximating a measure."""

    points: np.ndarray
    weights: np.ndarray
    nominal_dim: Optional[float] = None
    spec: Optional[MeasureSpec] = None

    def __post_init__(self):
        P = np.array(self.points, dtype=float)
        if P.ndim == 1:
            P = P[:, np.newaxis]
        w = np.array(self.weights, dtype=float).ravel()
        if P.ndim != 2 or P.shape[0] == 0 or P.shape[0] != w.shape[0]:
            raise InputError(f"SampledMeasure: {P.shape[0]} points but {w.shape[0]} weights")
        if not (np.all(np.isfinite(P)) and np.all(np.isfinite(w))):
            raise InputError("SampledMeasure: points and weights must be finite")
        if np.any(w < 0):
            raise InputError("SampledMeasure: weights must be nonnegative")
        if abs(w.sum() - 1.0) > MASS_TOL:
            raise InputError(f"SampledMeasure: weights sum to {w.sum():.15g}, not 1")
        radius = float(np.max(np.linalg.norm(P, axis=1)))
        if radius > SUPPORT_RADIUS + 1e-12:
            raise InputError(f"SampledMeasure: support reaches radius {radius:.6g} > {SUPPORT_RADIUS}")
        P.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "weights", w)

    @property
    def n_points(self):
        return self.points.shape[0]

    @property
    def ambient_dim(self):
        return self.points.shape[1]

    def distinct_count(self):
        return int(np.unique(self.points, axis=0).shape[0])


def _uniform_weights(N):
    return np.full(N, 1.0 / N)


# ---------------------------------------------------------------------------
# Generators

def four_corner_cantor(level):
    """level-th iterate of x ↦ x/4 + c, c ∈ {0, 3/4}², equal weights."""
    if not isinstance(level, (int, np.integer)) or not 1 <= level <= FOUR_CORNER_MAX_LEVEL:
        raise InputError(f"four_corner_cantor: level must be in [1, {FOUR_CORNER_MAX_LEVEL}], got {level}")
    corners = 0.75 * np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    pts = np.zeros((1, 2))
    for _ in range(level):
        pts = (pts[np.newaxis] / 4 + corners[:, np.newaxis]).reshape(-1, 2)
    return SampledMeasure(pts, _uniform_weights(len(pts)), 1.0,
                          MeasureSpec("four_corner_cantor", level=int(level)))


def line_cantor(s, level):
    """Two-map IFS on [0, 1] with ratio ρ = 2^(−1/s): a measure of dimension s."""
    if not 0 < s <= 1:
        raise InputError(f"line_cantor: s must lie in (0, 1], got {s}")
    if not isinstance(level, (int, np.integer)) or not 1 <= level <= LINE_CANTOR_MAX_LEVEL:
        raise InputError(f"line_cantor: level must be in [1, {LINE_CANTOR_MAX_LEVEL}], got {level}")
    rho = 2.0 ** (-1.0 / s)
    pts = np.zeros(1)
    for _ in range(level):
        pts = np.concatenate([rho * pts, rho * pts + (1 - rho)])
    return SampledMeasure(pts[:, np.newaxis], _uniform_weights(len(pts)), float(s),
                          MeasureSpec("line_cantor", level=int(level), s=float(s)))


def lebesgue_ball(dim, N, seed):
    """N uniform samples of the unit ball of R^dim."""
    if not isinstance(dim, (int, np.integer)) or dim < 1:
        raise InputError(f"lebesgue_ball: dim must be a positive integer, got {dim}")
    if N < 1:
        raise InputError(f"lebesgue_ball: need at least one sample, got {N}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((N, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    pts = g * rng.random(N)[:, np.newaxis] ** (1.0 / dim)
    return SampledMeasure(pts, _uniform_weights(N), float(dim),
                          MeasureSpec("lebesgue_ball", dim=int(dim), n_points=int(N), seed=int(seed)))


def atom(dim=1):
    """Unit point mass at the origin of R^dim."""
    return SampledMeasure(np.zeros((1, dim)), np.ones(1), 0.0, MeasureSpec("atom", dim=int(dim)))


def _embedding_rows(frame, inner_dim, n, seed):
    if isinstance(frame, str):
        if frame != "generic":
            raise InputError(f"unknown frame keyword '{frame}'")
        return Frame.random(n, inner_dim, np.random.default_rng(seed)).basis if inner_dim < n else np.eye(n)
    B = np.array(frame, dtype=float)
    if B.ndim != 2 or B.shape != (inner_dim, n):
        raise InputError(f"embedding frame must be {inner_dim}×{n}, got shape {B.shape}")
    if np.max(np.abs(B @ B.T - np.eye(inner_dim))) > 1e-10:
        raise InputError("embedding frame rows must be orthonormal")
    return B


def embedded(inner, frame, offset=None, ambient_dim=None, seed=0):
    """Push a measure into R^n along orthonormal rows (`frame`), then translate."""
    if isinstance(frame, Frame):
        frame = frame.basis
    if ambient_dim is None and isinstance(frame, str):
        raise InputError("embedded: a generic frame needs ambient_dim")
    n = ambient_dim if ambient_dim is not None else np.asarray(frame).shape[1]
    B = _embedding_rows(frame, inner.ambient_dim, n, seed)
    pts = inner.points @ B
    if offset is not None:
        pts = pts + np.asarray(offset, dtype=float)
    spec = None
    if inner.spec is not None:
        spec = MeasureSpec("embedded", inner=inner.spec, seed=int(seed), ambient_dim=int(n),
                           frame=frame if isinstance(frame, str) else tuple(map(tuple, B.tolist())),
                           offset=tuple(offset) if offset is not None else None)
    return SampledMeasure(pts, inner.weights, inner.nominal_dim, spec)


def _normalize_support(points):
    """Center on the bounding box and shrink into the unit ball if needed."""
    centred = points - (points.max(axis=0) + points.min(axis=0)) / 2
    radius = np.max(np.linalg.norm(centred, axis=1))
    return centred / radius if radius > 1 else centred


def product_embed(parts, n, N, seed):
    """N independent samples of the product of the factors, embedded in R^n.

    `parts` is a list of (SampledMeasure, rows, offset) with mutually
    orthogonal row spaces. Each factor is normalized into the unit ball and
    resampled by weight; a factor that already has N equally weighted points
    is permuted instead so no point repeats.
    """
    if not parts:
        raise InputError("product_embed: at least one factor is required")
    rng = np.random.default_rng(seed)
    bases = []
    for measure, rows, _ in parts:
        if isinstance(rows, Frame):
            rows = rows.basis
        bases.append(_embedding_rows(rows, measure.ambient_dim, n, seed))
    for a in range(len(bases)):
        for b in range(a + 1, len(bases)):
            if np.max(np.abs(bases[a] @ bases[b].T)) > 1e-10:
                raise InputError(f"product_embed: embedding subspaces of factors {a + 1} and {b + 1} overlap")
    total = np.zeros((N, n))
    nominal = 0.0
    for (measure, _, offset), B in zip(parts, bases):
        pts = _normalize_support(measure.points)
        w = measure.weights
        if measure.n_points == N and np.all(w == w[0]):
            idx = rng.permutation(N)
        else:
            idx = rng.choice(measure.n_points, size=N, p=w)
        total += pts[idx] @ B
        if offset is not None:
            total += np.asarray(offset, dtype=float)
        nominal += measure.nominal_dim if measure.nominal_dim is not None else math.nan
    radius = np.max(np.linalg.norm(total, axis=1))
    if radius > SUPPORT_RADIUS:
        total *= SUPPORT_RADIUS / radius
    spec = None
    if all(m.spec is not None for m, _, _ in parts):
        spec = MeasureSpec(
            "product", n_points=int(N), seed=int(seed), ambient_dim=int(n),
            parts=tuple(
                Placement(m.spec, tuple(map(tuple, B.tolist())), tuple(o) if o is not None else None)
                for (m, _, o), B in zip(parts, bases)
            ),
        )
    return SampledMeasure(total, _uniform_weights(N), nominal, spec)


def sharpness_measure(n, l, p, s, n_points, level, seed):
    """ν1 × ν2 with ν1 of dimension s on span(e_{l+1}) and ν2 Lebesgue on the unit ball of X.

    X = ⟨e_1, ..., e_l, e_{n−p+1}, ..., e_n⟩. `s = None` drops ν1 (μ = ν2);
    `s = 0` makes ν1 an atom.
    """
    if l < 0 or p < 0 or l + p >= n:
        raise InputError(f"need 0 <= l and l + p < n, got l={l}, p={p}, n={n}")
    eye = np.eye(n)
    X = np.vstack([eye[:l], eye[n - p:]]) if p else eye[:l]
    parts = []
    if s is not None:
        nu1 = atom(1) if s == 0 else line_cantor(s, level)
        parts.append((nu1, eye[l:l + 1], None))
    if l + p > 0:
        parts.append((lebesgue_ball(l + p, n_points, seed), X, None))
    if not parts:
        raise InputError("sharpness measure is empty: l + p = 0 and no s-dimensional factor")
    return product_embed(parts, n, n_points, seed)


def uniform_square(N, seed):
    """Uniform × uniform product of two segments: a square in R^2."""
    eye = np.eye(2)
    parts = [(lebesgue_ball(1, N, seed), eye[:1], None), (lebesgue_ball(1, N, seed + 1), eye[1:], None)]
    return product_embed(parts, 2, N, seed)


# ---------------------------------------------------------------------------
# Spec-driven generation and refinement

def generate(spec):
    """SampledMeasure for a MeasureSpec."""
    v = spec.variant
    if v == "four_corner_cantor":
        return four_corner_cantor(spec.level)
    if v == "line_cantor":
        return line_cantor(spec.s, spec.level)
    if v == "lebesgue_ball":
        if spec.n_points is None:
            raise InputError("lebesgue_ball needs n_points")
        return lebesgue_ball(spec.dim, spec.n_points, spec.seed)
    if v == "atom":
        return atom(spec.dim or 1)
    if v == "embedded":
        if spec.inner is None or spec.frame is None:
            raise InputError("embedded measure needs 'inner' and 'frame'")
        n = spec.ambient_dim if spec.ambient_dim is not None else len(spec.frame[0])
        return embedded(generate(spec.inner), spec.frame, spec.offset, n, spec.seed)
    if not spec.parts or spec.ambient_dim is None or spec.n_points is None:
        raise InputError("product measure needs 'parts', 'ambient_dim' and 'n_points'")
    parts = [(generate(p.measure), p.frame, p.offset) for p in spec.parts]
    return product_embed(parts, spec.ambient_dim, spec.n_points, spec.seed)


def resolution_step(spec):
    """Refinement steps that shrink the finest scale by a factor of at least 16."""
    v = spec.variant
    if v == "four_corner_cantor":
        return 2
    if v == "line_cantor":
        return max(1, math.ceil(4 * spec.s))
    if v in ("lebesgue_ball", "product"):
        dims = [spec.dim] if v == "lebesgue_ball" else [p.measure.ambient for p in spec.parts]
        return 4 * max(int(d) for d in dims)
    if v == "embedded":
        return resolution_step(spec.inner)
    return 1


def refine(spec, steps):
    """The same measure at a finer (steps > 0) or coarser (steps < 0) resolution.

    Cantor levels move by `steps`; sample counts scale by 2**steps.
    """
    v = spec.variant
    if v in ("four_corner_cantor", "line_cantor"):
        return MeasureSpec(v, level=spec.level + steps, s=spec.s)
    if v == "lebesgue_ball":
        return MeasureSpec(v, dim=spec.dim, n_points=max(1, int(round(spec.n_points * 2.0 ** steps))),
                           seed=spec.seed)
    if v == "embedded":
        return MeasureSpec(v, inner=refine(spec.inner, steps), frame=spec.frame, offset=spec.offset,
                           ambient_dim=spec.ambient_dim, seed=spec.seed)
    if v == "product":
        parts = tuple(Placement(refine(p.measure, steps), p.frame, p.offset) for p in spec.parts)
        return MeasureSpec(v, n_points=max(1, int(round(spec.n_points * 2.0 ** steps))), seed=spec.seed,
                           ambient_dim=spec.ambient_dim, parts=parts)
    return spec


# ---------------------------------------------------------------------------
# Import / export

def save_csv(measure, path):
    """Columns x_1..x_n, weight; 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = ",".join([f"x_{i + 1}" for i in range(measure.ambient_dim)] + ["weight"])
    data = np.column_stack([measure.points, measure.weights])
    np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g", newline="\n")
    return path


def load_csv(path, nominal_dim=None):
    check_file_exists(path)
    with open(path, encoding="utf-8") as f:
        header = f.readline().strip().split(",")
    if not header or header[-1] != "weight":
        raise InputError(f"{path}: expected a header ending in 'weight'")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return SampledMeasure(data[:, :-1], data[:, -1], nominal_dim)


def save_binary(measure, path, seed=None):
    """Little-endian float64 block (points then weight per row) plus a JSON sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.column_stack([measure.points, measure.weights]).astype("<f8").tofile(path)
    sidecar = {
        "N": measure.n_points,
        "n": measure.ambient_dim,
        "nominal_dim": measure.nominal_dim,
        "seed": seed,
        "spec": measure.spec.to_dict() if measure.spec is not None else None,
    }
    write_json(path.with_suffix(path.suffix + ".json"), sidecar)
    return path


def load_binary(path):
    path = Path(path)
    check_file_exists(path)
    sidecar_path = check_file_exists(path.with_suffix(path.suffix + ".json"))
    with open(sidecar_path, encoding="utf-8") as f:
        sidecar = json.load(f)
    N, n = int(sidecar["N"]), int(sidecar["n"])
    block = np.fromfile(path, dtype="<f8")
    if block.size != N * (n + 1):
        raise InputError(f"{path}: expected {N * (n + 1)} values, found {block.size}")
    block = block.reshape(N, n + 1)
    spec = MeasureSpec.from_dict(sidecar["spec"]) if sidecar.get("spec") else None
    return SampledMeasure(block[:, :-1], block[:, -1], sidecar.get("nominal_dim"), spec)
