"""
Dimension estimators for sampled measures: box counting, correlation
integral and discrete t-energies, plus projection of point clouds.
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import linregress

from projection_lab.utils.errors import InputError
from projection_lab.utils.fractal import SampledMeasure, generate, refine, resolution_step
from projection_lab.utils.utils import parallel_map, task_rng

MIN_DISTINCT_POINTS = 1000
MIN_WINDOW = 5
NOISE_FLOOR_SCALES = 2
BOX_OFFSETS = 3
MIN_PAIR_HITS = 50
DISTANCE_FLOOR = 1e-12
CLIPPED_PAIR_LIMIT = 1e-3
FINITE_RATIO = 1.5
MIN_ENERGY_POINTS = 16


@dataclass(frozen=True, eq=False)
class DimensionEstimate:
    value: float
    method: str
    fit_window: Optional[tuple]
    slope_stderr: float
    r_squared: float
    point_count: int
    fit_scales: np.ndarray = field(default_factory=lambda: np.empty(0))
    fit_counts: np.ndarray = field(default_factory=lambda: np.empty(0))
    warnings: tuple = ()

    def to_dict(self):
        return {
            "value": self.value,
            "method": self.method,
            "window": list(self.fit_window) if self.fit_window else None,
            "stderr": self.slope_stderr,
            "r2": self.r_squared,
            "N": self.point_count,
            "warnings": list(self.warnings),
        }

    def fit_rows(self):
        """(scale, count) rows of the log-log data, for CSV export."""
        return list(zip(self.fit_scales.tolist(), self.fit_counts.tolist()))


def _degenerate(method, N, reason):
    warnings.warn(reason, RuntimeWarning, stacklevel=3)
    return DimensionEstimate(0.0, method, None, 0.0, 1.0, N, warnings=(reason,))


def _atomic_reason(measure):
    distinct = measure.distinct_count()
    if distinct == 1:
        return "all points coincide; the measure is a single atom"
    if distinct < MIN_DISTINCT_POINTS:
        return f"only {distinct} distinct points; treated as atomic"
    return None


def _line_fit(x, y):
    if np.ptp(y) == 0:
        return 0.0, 0.0, 1.0
    fit = linregress(x, y)
    return float(fit.slope), float(fit.stderr), float(fit.rvalue ** 2)


def select_window(x, y, min_window=MIN_WINDOW, exclude_tail=NOISE_FLOOR_SCALES):
    """Contiguous window of >= min_window points maximizing r², never touching the last `exclude_tail`.

    Points are ordered from coarse to fine scale. Ties prefer the longer window.
    Returns (start, stop, slope, stderr, r2).
    """
    usable = len(x) - exclude_tail
    if usable < min_window:
        raise InputError(f"only {usable} resolvable scales outside the noise floor; need {min_window}")
    best = None
    for start in range(usable - min_window + 1):
        for stop in range(start + min_window, usable + 1):
            slope, stderr, r2 = _line_fit(x[start:stop], y[start:stop])
            key = (round(r2, 12), stop - start)
            if best is None or key > best[0]:
                best = (key, start, stop, slope, stderr, r2)
    _, start, stop, slope, stderr, r2 = best
    return start, stop, slope, stderr, r2


def principal_axes(points, weights):
    """Coordinates along the principal axes (near-null axes dropped), signs fixed by the third moment."""
    mean = weights @ points
    centred = points - mean
    _, sv, vt = np.linalg.svd(centred * np.sqrt(weights)[:, np.newaxis], full_matrices=False)
    keep = sv > 1e-12 * max(sv[0], 1e-300)
    coords = centred @ vt[keep].T
    third = weights @ coords ** 3
    coords[:, third < 0] *= -1
    return coords


def project_points(f, mu):
    """Π_V applied to every point; weights untouched."""
    if f.ambient_dim != mu.ambient_dim:
        raise InputError(f"frame lives in R^{f.ambient_dim} but the measure in R^{mu.ambient_dim}")
    B = f.basis
    return SampledMeasure(mu.points @ B.T @ B, mu.weights)


def _box_count(coords, weights, eps, offset):
    idx = np.floor((coords + offset) / eps).astype(np.int64)
    idx -= idx.min(axis=0)
    sizes = idx.max(axis=0) + 1
    possible = float(np.prod(sizes.astype(float)))
    if possible < 2.0 ** 62:
        strides = np.cumprod(np.concatenate([[1], sizes[:0:-1]]))[::-1]
        _, inverse = np.unique(idx @ strides, return_inverse=True)
    else:
        _, inverse = np.unique(idx, axis=0, return_inverse=True)
    mass = np.bincount(inverse.ravel(), weights=weights)
    floor = 1.0 / (10.0 * min(len(weights), possible))
    return int(np.count_nonzero(mass >= floor))


def box_counting_dim(mu, scales=None, seed=0, threads=0):
    """Slope of log N(ε) against log(1/ε), grid-averaged over BOX_OFFSETS random anchors."""
    N = mu.n_points
    reason = _atomic_reason(mu)
    if reason:
        return _degenerate("box_counting", N, reason)
    coords = principal_axes(mu.points, mu.weights)
    diam = float(np.linalg.norm(np.ptp(coords, axis=0)))
    if scales is None:
        scales = np.geomspace(diam / 4, diam * 1e-4, 25)
    scales = np.sort(np.asarray(scales, dtype=float))[::-1]
    if scales[0] >= diam or scales[-1] <= diam * 1e-4:
        raise InputError(f"box scales must lie in ({diam * 1e-4:.3g}, {diam:.3g})")

    def count(index):
        rng = task_rng(seed, index)
        eps = scales[index]
        return np.mean([_box_count(coords, mu.weights, eps, rng.random(coords.shape[1]) * eps)
                        for _ in range(BOX_OFFSETS)])

    counts = np.array(parallel_map(count, range(len(scales)), threads))
    # a quarter of N boxes or more means most boxes hold a handful of points
    resolved = counts <= N / 4
    eps, counts = scales[resolved], counts[resolved]
    x, y = np.log(1 / eps), np.log(counts)
    start, stop, slope, stderr, r2 = select_window(x, y)
    return DimensionEstimate(max(0.0, slope), "box_counting", (float(eps[stop - 1]), float(eps[start])),
                             stderr, r2, N, eps, counts)


def correlation_dim(mu, pair_budget=10 ** 6, seed=0, radii=None, threads=0, shard=1 << 17):
    """Slope of log C(r) for weighted random pairs with distinct indices."""
    N = mu.n_points
    reason = _atomic_reason(mu)
    if reason:
        return _degenerate("correlation", N, reason)
    sizes = [shard] * (pair_budget // shard) + ([pair_budget % shard] if pair_budget % shard else [])

    def distances(index):
        rng = task_rng(seed, index)
        i = rng.choice(N, size=sizes[index], p=mu.weights)
        j = rng.choice(N, size=sizes[index], p=mu.weights)
        keep = i != j
        return np.linalg.norm(mu.points[i[keep]] - mu.points[j[keep]], axis=1)

    d = np.sort(np.concatenate(parallel_map(distances, range(len(sizes)), threads)))
    if radii is None:
        radii = np.geomspace(d[-1] / 2, d[-1] * 1e-5, 31)
    radii = np.sort(np.asarray(radii, dtype=float))[::-1]
    hits = np.searchsorted(d, radii, side="right")
    resolved = hits >= MIN_PAIR_HITS
    r, hits = radii[resolved], hits[resolved]
    corr = hits / len(d)
    start, stop, slope, stderr, r2 = select_window(np.log(1 / r), -np.log(corr))
    return DimensionEstimate(max(0.0, slope), "correlation", (float(r[stop - 1]), float(r[start])),
                             stderr, r2, N, r, hits.astype(float))


@dataclass(frozen=True)
class EnergyDiagnostic:
    t: float
    point_counts: tuple
    values: tuple
    ratios: tuple
    finite_trend: bool
    clipped_pairs: int
    clipped_flag: bool
    warnings: tuple = ()

    def to_dict(self):
        return {
            "t": self.t,
            "point_counts": list(self.point_counts),
            "values": list(self.values),
            "ratios": list(self.ratios),
            "finite_trend": self.finite_trend,
            "clipped_pairs": self.clipped_pairs,
            "clipped_flag": self.clipped_flag,
            "warnings": list(self.warnings),
        }


def discrete_energy(points, weights, t, block=2048):
    """Σ_{i≠j} w_i w_j |x_i − x_j|^(−t), distances floored at DISTANCE_FLOOR.

    Returns (energy, number of clipped unordered pairs).
    """
    N = len(weights)
    total, clipped = 0.0, 0
    for start in range(0, N, block):
        rows = np.arange(start, min(N, start + block))
        D = cdist(points[rows], points)
        D[rows - start, rows] = np.inf
        close = D < DISTANCE_FLOOR
        clipped += int(np.count_nonzero(close))
        D[close] = DISTANCE_FLOOR
        total += float(weights[rows] @ (D ** -t) @ weights)
    return total, clipped // 2


def _coarser_samples(mu, levels):
    """Up to `levels` resolutions of μ, coarsest first, ending at μ itself.

    Coarsening stops at the first resolution the spec cannot express or
    that has fewer than MIN_ENERGY_POINTS points.
    """
    step = resolution_step(mu.spec)
    samples = [mu]
    for j in range(1, levels):
        try:
            coarse = generate(refine(mu.spec, -j * step))
        except InputError:
            break
        if coarse.n_points < MIN_ENERGY_POINTS:
            break
        samples.append(coarse)
    return samples[::-1]


def energy_diagnostic(mu, t, subsample=4096, seed=0, levels=3):
    """t-energies of the measure's spec at up to `levels` resolutions ending at the measure's own.

    The trend is finite when the last ratio of successive energies is
    below FINITE_RATIO; each resolution step shrinks the finest scale by at
    least a factor 16. With a single usable resolution there is no trend:
    finite_trend is False and a RuntimeWarning is raised.
    """
    if not t > 0:
        raise InputError(f"t must be positive, got {t}")
    if mu.spec is None:
        raise InputError("energy_diagnostic needs a measure generated from a MeasureSpec")
    samples = _coarser_samples(mu, levels)
    notes = ()
    if len(samples) < 2:
        notes = (f"no coarser resolution of {mu.spec.variant} with at least {MIN_ENERGY_POINTS} points; "
                 "energy trend undetermined",)
        warnings.warn(notes[0], RuntimeWarning, stacklevel=2)
    rng = np.random.default_rng(seed)
    counts, values, clipped, pairs = [], [], 0, 0
    for sample in samples:
        pts, w = sample.points, sample.weights
        if sample.n_points > subsample:
            idx = rng.choice(sample.n_points, size=subsample, replace=False, p=w)
            pts, w = pts[idx], np.full(subsample, 1.0 / subsample)
        energy, c = discrete_energy(pts, w, t)
        counts.append(len(w))
        values.append(energy)
        clipped += c
        pairs += len(w) * (len(w) - 1) // 2
    ratios = tuple(b / a if a > 0 else math.inf for a, b in zip(values, values[1:]))
    return EnergyDiagnostic(float(t), tuple(counts), tuple(values), ratios,
                            bool(ratios and ratios[-1] < FINITE_RATIO), clipped,
                            clipped > CLIPPED_PAIR_LIMIT * max(pairs, 1), notes)
