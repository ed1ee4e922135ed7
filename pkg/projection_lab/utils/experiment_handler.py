"""
Experiment harness: bound checks, sharpness pinches and transversality
panels over parameter grids, producing ExperimentReport objects.
"""

import math
import time
from dataclasses import dataclass, field
from itertools import product

import numpy as np
import scipy

import projection_lab
from projection_lab.utils.dimest import box_counting_dim, correlation_dim, project_points
from projection_lab.utils.errors import ExperimentRefused, InputError, LabError
from projection_lab.utils.family import (
    RotationFamily,
    extend_family,
    klimits_bounds,
    nondegeneracy_check,
    nondegeneracy_scan,
    p_of_l,
    sharpness_family,
    theorem_lower_bound,
    transversality_probe,
)
from projection_lab.utils.fractal import generate, sharpness_measure
from projection_lab.utils.grassmann import complement
from projection_lab.utils.utils import banner, detail, parallel_map, step, success, task_rng, task_seed, warn

MAX_VIOLATION_FRACTION = 0.05
MIN_SHARPNESS_FRACTION = 0.9


@dataclass(eq=False)
class ExperimentReport:
    """Rows, summary and provenance of one run; `runtime` is kept out of `to_dict`."""

    mode: str
    rows: list
    summary: dict
    provenance: dict
    fitdata: dict = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def passed(self):
        return bool(self.summary.get("passed", False))

    def to_dict(self):
        return {
            "mode": self.mode,
            "summary": self.summary,
            "provenance": self.provenance,
            "rows": self.rows,
        }


def provenance(cfg):
    return {
        "config_hash": cfg.config_hash,
        "seed": cfg.seed,
        "version": projection_lab.__version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def lambda_grid_points(radii, counts):
    """Cell centres of a per-axis uniform grid over Π ]−r_a, r_a[, in lexicographic order."""
    axes = [r * (-1 + (2 * np.arange(c) + 1) / c) for r, c in zip(radii, counts)]
    return np.array(list(product(*axes)))


def _finite(x):
    return None if x is None or not math.isfinite(x) else float(x)


def _gate(family, force):
    result = nondegeneracy_check(family)
    if result.passed:
        success(f"Family is non-degenerate at the grid centre (wedge norm {result.wedge_norm:.6g})")
        return result
    message = (f"family fails the non-degeneracy check at the grid centre (wedge norm {result.wedge_norm:.3g}); "
               "the lower bound is not necessarily true without it")
    if not force:
        raise ExperimentRefused(message)
    warn(f"{message} (continuing because of --force)")
    return result


def _sweep(family, mu, grid, cfg, verbose=False):
    """Project μ onto V_λ and estimate its dimension at every grid point."""

    def estimate(index):
        lam = grid[index]
        projected = project_points(family.frame(lam), mu)
        seed = task_seed(cfg.seed, index)
        try:
            if cfg.estimator.method == "box_counting":
                est = box_counting_dim(projected, cfg.estimator.scales, seed=seed, threads=1)
            else:
                est = correlation_dim(projected, cfg.estimator.pair_budget, seed=seed, threads=1)
        except LabError as e:
            return None, str(e)
        detail(f"λ = {np.round(lam, 6).tolist()}: estimate {est.value:.4f} (r² {est.r_squared:.4f})", verbose)
        return est, None

    return parallel_map(estimate, range(len(grid)), cfg.threads)


def _rows(grid, results, bound, extra=None):
    rows, fitdata = [], {}
    for index, (lam, (est, error)) in enumerate(zip(grid, results)):
        value = est.value if est is not None else math.nan
        row = {
            "lambda": [float(x) for x in lam],
            "est_dim": _finite(value),
            "bound": float(bound),
            "margin": _finite(value - bound),
            "fit_r2": _finite(est.r_squared) if est is not None else None,
            "warnings": list(est.warnings) if est is not None else [error],
        }
        if extra:
            row.update(extra(index, value))
        rows.append(row)
        if est is not None and len(est.fit_scales):
            fitdata[tuple(row["lambda"])] = est.fit_rows()
    order = sorted(range(len(rows)), key=lambda i: rows[i]["lambda"])
    rows = [rows[i] for i in order]
    fitdata = {f"lambda-{n + 1:04d}": fitdata[tuple(rows[n]["lambda"])]
               for n in range(len(rows)) if tuple(rows[n]["lambda"]) in fitdata}
    return rows, fitdata


def run_bound_check(cfg, force=False, verbose=False):
    """Audit the almost-sure lower bound over a parameter grid."""
    started = time.perf_counter()
    spec = cfg.family
    family = RotationFamily(spec)
    banner(f"BOUND CHECK: n={spec.n}, m={spec.m}, k={spec.k}")
    _gate(family, force)

    mu = generate(cfg.measure)
    if mu.nominal_dim is None or not math.isfinite(mu.nominal_dim):
        raise InputError("bound_check needs a measure with a known nominal dimension")
    bound = theorem_lower_bound(spec.n, spec.m, spec.k, mu.nominal_dim)
    low = max(0.0, mu.nominal_dim - (spec.n - spec.m))
    high = min(mu.nominal_dim, float(spec.m))
    step(f"μ: {cfg.measure.variant}, {mu.n_points} points, nominal dim {mu.nominal_dim:.6g}; bound {bound:.6g}")

    grid = lambda_grid_points(spec.radii, cfg.lambda_grid)
    degenerate, _ = nondegeneracy_scan(family, grid)
    step(f"Estimating {len(grid)} projections ({cfg.estimator.method})")
    results = _sweep(family, mu, grid, cfg, verbose)
    tol = cfg.tolerance

    def flags(index, value):
        failure = not math.isfinite(value) or value < low - tol or value > high + tol
        return {
            "degenerate": bool(degenerate[index]),
            "estimator_failure": bool(failure),
            "violation": bool(not failure and not degenerate[index] and value < bound - tol),
        }

    rows, fitdata = _rows(grid, results, bound, flags)
    eligible = [r for r in rows if not r["degenerate"]]
    violations = sum(r["violation"] for r in eligible)
    above = sum(r["est_dim"] is not None and r["est_dim"] >= bound - tol for r in eligible)
    margins = [r["margin"] for r in rows if r["margin"] is not None]
    fraction = violations / len(eligible) if eligible else 0.0
    summary = {
        "nominal_dim": mu.nominal_dim,
        "bound": bound,
        "natural_band": [low, high],
        "tolerance": tol,
        "rows": len(rows),
        "degenerate_rows": len(rows) - len(eligible),
        "estimator_failures": sum(r["estimator_failure"] for r in rows),
        "violation_fraction": fraction,
        "fraction_at_bound": above / len(eligible) if eligible else 0.0,
        "min_margin": min(margins) if margins else None,
        "passed": fraction <= MAX_VIOLATION_FRACTION,
    }
    report = ExperimentReport("bound_check", rows, summary, provenance(cfg), fitdata,
                              time.perf_counter() - started)
    _announce(report, f"violation fraction {fraction:.3f}")
    return report


def run_sharpness(cfg, force=False, verbose=False):
    """Pinch the projected dimension between the lower bound and the construction's upper bound."""
    started = time.perf_counter()
    n, m, k, l, p, s = cfg.n, cfg.m, cfg.k, cfg.l, cfg.p, cfg.s
    banner(f"SHARPNESS: n={n}, m={m}, k={k}, l={l}, p={p}, s={s}")
    p_expected = p_of_l(n, m, k, l)
    if p != p_expected:
        raise InputError(f"p = {p} does not match p(l) = {p_expected} for n={n}, m={m}, k={k}, l={l}")
    lower, upper = klimits_bounds(n, m, l, p)
    step(f"Checking {lower} < k = {k} <= {upper}")
    spec = sharpness_family(n, m, k, l, p)
    family = RotationFamily(spec)
    _gate(family, force)

    mu = generate(cfg.measure) if cfg.measure is not None else \
        sharpness_measure(n, l, p, s, cfg.n_points, cfg.level, cfg.seed)
    expected = float(l + (s or 0.0))
    bound = theorem_lower_bound(n, m, k, mu.nominal_dim)
    step(f"μ: {mu.n_points} points, nominal dim {mu.nominal_dim:.6g}; expected projected dim {expected:.6g}")

    grid = lambda_grid_points(spec.radii, cfg.lambda_grid)
    results = _sweep(family, mu, grid, cfg, verbose)
    tol = cfg.tolerance

    def window(index, value):
        return {
            "expected": expected,
            "in_window": bool(math.isfinite(value) and abs(value - expected) <= tol),
        }

    rows, fitdata = _rows(grid, results, bound, window)
    fraction = sum(r["in_window"] for r in rows) / len(rows)
    summary = {
        "nominal_dim": mu.nominal_dim,
        "bound": bound,
        "expected": expected,
        "p_of_l": p_expected,
        "tolerance": tol,
        "rows": len(rows),
        "fraction_in_window": fraction,
        "passed": fraction >= MIN_SHARPNESS_FRACTION,
    }
    report = ExperimentReport("sharpness", rows, summary, provenance(cfg), fitdata,
                              time.perf_counter() - started)
    _announce(report, f"{fraction:.0%} of rows within ±{tol} of {expected:.4g}")
    return report


def _panel(family, site, cfg):
    if cfg.directions:
        return [np.asarray(w, dtype=float) for w in cfg.directions]
    kernel = complement(family.frame(site)).basis
    directions = []
    for i in range(cfg.panel):
        w = task_rng(cfg.seed, i).standard_normal(kernel.shape[0]) @ kernel
        directions.append(w / np.linalg.norm(w))
    return directions


def run_transversality(cfg, verbose=False):
    """Fit sublevel exponents over a panel of directions near the centre plane's kernel."""
    started = time.perf_counter()
    spec = cfg.family
    family = RotationFamily(spec)
    lam0 = np.asarray(cfg.lambda0, dtype=float) if cfg.lambda0 is not None else np.zeros(spec.k)
    banner(f"TRANSVERSALITY: n={spec.n}, m={spec.m}, k={spec.k}")
    summary = {}
    target = None
    probe_family, site = family, lam0
    if cfg.l is not None:
        ext = extend_family(family, lam0, cfg.l, seed=cfg.seed, threads=cfg.threads)
        summary["extension"] = ext.to_dict()
        if ext.noop:
            warn(ext.reason)
            summary["passed"] = True
            return ExperimentReport("transversality", [], summary, provenance(cfg), {},
                                    time.perf_counter() - started)
        step(f"Extended by p = {ext.p} with t = {ext.t}; target exponent r = {ext.r} "
             f"(witness d' = {ext.witness.d_prime_hat:.4g})")
        probe_family, site, target = ext.family, ext.site, ext.r

    rows, fitdata, exponents = [], {}, []
    for i, w in enumerate(_panel(probe_family, site, cfg)):
        probe = transversality_probe(probe_family, site, w, deltas=cfg.deltas, samples=cfg.samples,
                                     seed=task_seed(cfg.seed, i), threads=cfg.threads)
        row = {"direction": w.tolist(), "exponent": probe.exponent, "diagnostic": probe.diagnostic,
               "radius": probe.radius, "samples": probe.samples}
        rows.append(row)
        fitdata[f"direction-{i + 1:02d}"] = list(zip(probe.deltas.tolist(), probe.fractions.tolist(),
                                                      probe.hits.tolist()))
        if probe.diagnostic:
            warn(f"direction {i + 1} excluded from the panel: {probe.diagnostic}")
        else:
            exponents.append(probe.exponent)
            detail(f"direction {i + 1}: r̂ = {probe.exponent:.4f}", verbose)

    tol = cfg.exponent_tolerance if cfg.exponent_tolerance is not None else \
        (min(0.15 * target, 0.4) if target else None)
    median = float(np.median(exponents)) if exponents else None
    summary.update({
        "target_r": target,
        "exponents": exponents,
        "min_exponent": min(exponents) if exponents else None,
        "median_exponent": median,
        "excluded": len(rows) - len(exponents),
        "exponent_tolerance": tol,
        "passed": bool(median is not None and (target is None or abs(median - target) <= tol)),
    })
    report = ExperimentReport("transversality", rows, summary, provenance(cfg), fitdata,
                              time.perf_counter() - started)
    _announce(report, f"median r̂ = {median}" if median is not None else "no usable direction")
    return report


def _announce(report, message):
    if report.passed:
        success(f"{report.mode}: {message}")
    else:
        warn(f"{report.mode}: {message}; failing parameters are flagged for manual inspection")
