"""
Property suites behind `projection-lab verify`.

Every check returns (passed, detail). Statistical checks use fixed internal
seeds, so the table does not depend on the caller's seed. Checks marked slow
run the full pipelines and only run when asked for.
"""

import fnmatch
import math
import tempfile
from pathlib import Path

import numpy as np
from scipy.stats import linregress

from projection_lab.utils.config_handler import ExperimentConfig
from projection_lab.utils.dimest import box_counting_dim, correlation_dim, energy_diagnostic, project_points
from projection_lab.utils.experiment_handler import run_bound_check, run_sharpness, run_transversality
from projection_lab.utils.family import (
    FamilySpec,
    RotationFamily,
    dot_filling_oracle,
    extend_family,
    extended_plane_derivative_check,
    extension_wedge_margin,
    klimits_bounds,
    nondegeneracy_check,
    p_of_l,
    projection_jacobian,
    random_family,
    reparametrize,
    theorem_lower_bound,
)
from projection_lab.utils.fractal import (
    SampledMeasure,
    embedded,
    four_corner_cantor,
    lebesgue_ball,
    line_cantor,
    uniform_square,
)
from projection_lab.utils.grassmann import (
    CHART_LIMIT,
    ChartPoint,
    Frame,
    chart_point_frame,
    chart_spanning_vectors,
    complement,
    projector,
    projector_matrix,
    rotate,
    span_projector,
    subspace_distance,
    tangent_projection_derivative,
)
from projection_lab.utils.multivec import cauchy_binet_norm, gram_norm, wedge_operator_norm
from projection_lab.utils.report_handler import write_report
from projection_lab.utils.utils import step

SUITE_SEED = 20240601

FAMILY_N3 = {"n": 3, "m": 2, "k": 1, "base": "standard",
             "schedule": [{"param": 1, "i": 1, "j": 3}]}
FAMILY_N4 = {"n": 4, "m": 2, "k": 3, "base": "standard",
             "schedule": [{"param": 1, "i": 1, "j": 3}, {"param": 2, "i": 1, "j": 4},
                          {"param": 3, "i": 2, "j": 3}]}


def _board_range():
    for n in range(2, 9):
        for m in range(1, n):
            for k in range(1, m * (n - m)):
                for l in range(m):
                    yield n, m, k, l


def check_multivec_oracle(cases=10 ** 4):
    rng = np.random.default_rng(SUITE_SEED)
    worst = 0.0
    for _ in range(cases):
        n = int(rng.integers(1, 7))
        r = int(rng.integers(1, n + 1))
        D = rng.integers(-3, 4, size=(r, n)).astype(float)
        a, b = gram_norm(D), cauchy_binet_norm(D)
        worst = max(worst, abs(a - b) / (1 + b))
    return worst <= 1e-9, f"{cases} integer matrices, worst relative gap {worst:.2e}"


def check_wedge_determinant(cases=2000):
    rng = np.random.default_rng(SUITE_SEED + 1)
    worst = 0.0
    for _ in range(cases):
        n = int(rng.integers(1, 7))
        L = rng.integers(-3, 4, size=(n, n)).astype(float)
        det = abs(np.linalg.det(L))
        worst = max(worst, abs(wedge_operator_norm(L, n) - det) / (1 + det))
    return worst <= 1e-9, f"{cases} square matrices, worst relative gap {worst:.2e}"


def _order(steps, errors):
    errors = np.asarray(errors)
    if np.all(errors < 1e-12):
        return math.inf
    usable = errors > 0
    return float(linregress(np.log(np.asarray(steps)[usable]), np.log(errors[usable])).slope)


def check_tangent_derivative(cases=100):
    rng = np.random.default_rng(SUITE_SEED + 2)
    steps = (1e-2, 1e-3, 1e-4)
    worst = math.inf
    for _ in range(cases):
        n = int(rng.integers(2, 7))
        m = int(rng.integers(1, n))
        base = Frame.random(n, m, rng)
        chart = ChartPoint.at(base)
        i, j = int(rng.integers(0, m)), int(rng.integers(m, n))
        z = rng.standard_normal(n)
        analytic = tangent_projection_derivative(chart, i, j, z)

        def moved(h):
            angles = np.zeros((m, n - m))
            angles[i, j - m] = h
            frame = chart_point_frame(ChartPoint(base, chart.complement, angles))
            return projector_matrix(frame.basis) @ z

        errors = [np.linalg.norm((moved(h) - moved(-h)) / (2 * h) - analytic) for h in steps]
        worst = min(worst, _order(steps, errors))
    return worst >= 1.9, f"{cases} cases, worst central-difference order {worst:.3f}"


def check_p_enumeration(p_function=p_of_l):
    mismatches = [(n, m, k, l) for n, m, k, l in _board_range()
                  if p_function(n, m, k, l) != dot_filling_oracle(n, m, k, l)]
    detail = "all boards agree" if not mismatches else f"{len(mismatches)} mismatches, first {mismatches[0]}"
    return not mismatches, detail


def check_p_monotone(p_function=p_of_l):
    bad = [(n, m, k) for n, m, k, l in _board_range()
           if l > 0 and p_function(n, m, k, l) < p_function(n, m, k, l - 1)]
    return not bad, "p(l) nondecreasing in l" if not bad else f"decreases at {bad[0]}"


def check_klimits(p_function=p_of_l):
    checked, bad = 0, []
    for n, m, k, l in _board_range():
        p = p_function(n, m, k, l)
        if p >= n - m:
            continue
        checked += 1
        lower, upper = klimits_bounds(n, m, l, p)
        if not lower < k <= upper:
            bad.append((n, m, k, l))
    detail = f"{checked} regimes with p(l) < n-m" + (f", violated at {bad[0]}" if bad else "")
    return not bad, detail


def _random_site(spec, rng):
    return spec.radii * rng.uniform(-0.5, 0.5, spec.k)


def _random_case(rng):
    n = int(rng.integers(3, 6))
    m = int(rng.integers(1, n))
    k = int(rng.integers(1, m * (n - m)))
    spec = random_family(n, m, k, int(rng.integers(1 << 31)))
    return spec, _random_site(spec, rng)


def check_projbound(cases=100):
    rng = np.random.default_rng(SUITE_SEED + 3)
    worst = math.inf
    for _ in range(cases):
        spec, site = _random_case(rng)
        P = projector_matrix(RotationFamily(spec).frame(site).basis)
        z = rng.standard_normal(spec.n)
        z1, z2 = P @ z, z - P @ z
        r = int(rng.integers(1, min(spec.m, spec.k) + 1))
        whole = wedge_operator_norm(projection_jacobian(spec, site, z1 + z2), r)
        part = wedge_operator_norm(projection_jacobian(spec, site, z2), r)
        worst = min(worst, whole - part)
    return worst >= -1e-9, f"{cases} cases, min ‖∧r DΠ(z1+z2)‖ − ‖∧r DΠ(z2)‖ = {worst:.3e}"


def check_images(cases=50):
    rng = np.random.default_rng(SUITE_SEED + 4)
    worst = 0.0
    for _ in range(cases):
        spec, site = _random_case(rng)
        P = projector_matrix(RotationFamily(spec).frame(site).basis)
        z = rng.standard_normal(spec.n)
        z1, z2 = P @ z, z - P @ z
        worst = max(worst,
                    np.max(np.abs(P @ projection_jacobian(spec, site, z1))),
                    np.max(np.abs(projection_jacobian(spec, site, z2) - P @ projection_jacobian(spec, site, z2))))
    return worst <= 1e-9, f"{cases} cases, largest off-subspace component {worst:.2e}"


def check_extended_derivative(cases=20):
    rng = np.random.default_rng(SUITE_SEED + 5)
    worst = math.inf
    for _ in range(cases):
        n = int(rng.integers(3, 6))
        m = int(rng.integers(1, n - 1))
        base = Frame.random(n, m, rng)
        Q = np.vstack([base.basis, complement(base).basis])
        direction = rng.uniform(-1, 1, (m, n - m))
        direction *= 0.5 / np.max(np.abs(direction))

        def path(s, Q=Q, m=m, direction=direction):
            return chart_spanning_vectors(Q, m, (s * direction)[np.newaxis])[0]

        c = float(rng.uniform(-0.3, 0.3))
        Vc = Frame.from_vectors(path(c))
        u = rng.standard_normal(n)
        u -= projector_matrix(Vc.basis) @ u
        check = extended_plane_derivative_check(path, c, Frame(u / np.linalg.norm(u)), seed=int(rng.integers(1 << 31)))
        worst = min(worst, check.order)
    return worst >= 1.9, f"{cases} paths, worst order {worst:.3f}"


def check_extension(l=1):
    spec = FamilySpec.from_dict(FAMILY_N4)
    ext = extend_family(spec, np.zeros(spec.k), l, seed=SUITE_SEED, threads=1)
    worst, target = extension_wedge_margin(ext)
    family = ext.family
    rng = np.random.default_rng(SUITE_SEED + 6)
    gap = 0.0
    for _ in range(10):
        lam = family.radii * rng.uniform(-0.5, 0.5, family.param_dim)
        E = family.spanning(lam[np.newaxis])[0]
        P_small = span_projector(E[:spec.m])
        gap = max(gap, np.max(np.abs(P_small @ span_projector(E) - P_small)))
    passed = worst >= target * (1 - 1e-9) and gap <= 1e-9
    return passed, (f"r = {ext.r}, min ‖∧r DΠ(z)‖ = {worst:.4g} >= d'/√t^p = {target:.4g}; "
                    f"nesting gap {gap:.1e}")


def check_complement_projector(cases=200):
    rng = np.random.default_rng(SUITE_SEED + 7)
    worst = 0.0
    for _ in range(cases):
        n = int(rng.integers(2, 8))
        f = Frame.random(n, int(rng.integers(1, n)), rng)
        gap = projector(complement(f)).entries - (np.eye(n) - projector(f).entries)
        worst = max(worst, float(np.max(np.abs(gap))))
    return worst <= 1e-10, f"{cases} frames, max |Π_(V⊥) − (I − Π_V)| = {worst:.2e}"


def check_rotate_norm(cases=1000):
    rng = np.random.default_rng(SUITE_SEED + 8)
    worst = 0.0
    for _ in range(cases):
        n = int(rng.integers(2, 8))
        i, j = rng.choice(n, size=2, replace=False)
        x = rng.standard_normal(n)
        y = rotate(x, int(i), int(j), float(rng.uniform(-np.pi, np.pi)))
        worst = max(worst, abs(np.linalg.norm(y) - np.linalg.norm(x)) / np.linalg.norm(x))
    return worst <= 1e-12, f"{cases} rotations, worst relative norm change {worst:.2e}"


def check_chart_injectivity(cases=200):
    rng = np.random.default_rng(SUITE_SEED + 9)
    closest = math.inf
    for _ in range(cases):
        n = int(rng.integers(2, 7))
        m = int(rng.integers(1, n))
        chart = ChartPoint.at(Frame.random(n, m, rng))
        alpha = rng.uniform(-CHART_LIMIT / 2, CHART_LIMIT / 2, (m, n - m))
        nudge = rng.uniform(-1, 1, (m, n - m))
        nudged = alpha + 1e-3 * nudge / np.max(np.abs(nudge))
        planes = [chart_point_frame(ChartPoint(chart.base, chart.complement, a)) for a in (alpha, nudged)]
        closest = min(closest, subspace_distance(*planes))
    return closest > 1e-6, f"{cases} pairs of nearby angles, smallest plane distance {closest:.3e}"


def check_bound_monotone():
    grid = np.linspace(0.0, 1.0, 21)
    bad = []
    for n in range(2, 9):
        for m in range(1, n):
            for k in range(1, m * (n - m)):
                values = [theorem_lower_bound(n, m, k, n * t) for t in grid]
                if any(b < a - 1e-12 for a, b in zip(values, values[1:])):
                    bad.append((n, m, k))
    return not bad, "bound nondecreasing in d" if not bad else f"decreases for (n, m, k) = {bad[0]}"


def _random_rotation(k, rng):
    Q, R = np.linalg.qr(rng.standard_normal((k, k)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] *= -1
    return Q


def check_reparametrization(cases=50):
    rng = np.random.default_rng(SUITE_SEED + 10)
    worst = 0.0
    for _ in range(cases):
        spec, _ = _random_case(rng)
        Q = _random_rotation(spec.k, rng)
        moved = reparametrize(spec, Q)
        u = rng.standard_normal(spec.k)
        lam = 0.5 * min(spec.radii.min(), moved.radii.min()) * u / np.linalg.norm(u)
        for site in (np.zeros(spec.k), lam):
            a = nondegeneracy_check(spec, site).wedge_norm
            b = nondegeneracy_check(moved, Q.T @ site).wedge_norm
            worst = max(worst, abs(a - b) / (1 + a))
    return worst <= 1e-9, f"{cases} families, worst relative wedge-norm change {worst:.2e}"


def _skewed_sheet(N=50000):
    rng = np.random.default_rng(SUITE_SEED + 11)
    pts = rng.random((N, 2)) ** 2 * np.array([1.0, 0.5])
    return SampledMeasure(pts, np.full(N, 1.0 / N))


def check_rotation_invariance():
    sheet = _skewed_sheet()
    lifted = embedded(sheet, "generic", ambient_dim=4, seed=SUITE_SEED)
    gaps = []
    for estimate in (box_counting_dim, correlation_dim):
        gaps.append(abs(estimate(sheet, seed=SUITE_SEED).value - estimate(lifted, seed=SUITE_SEED).value))
    return max(gaps) <= 0.02, f"box-counting gap {gaps[0]:.4f}, correlation gap {gaps[1]:.4f}"


def check_natural_bands(planes=3):
    rng = np.random.default_rng(SUITE_SEED + 12)
    thin = embedded(four_corner_cantor(7), "generic", ambient_dim=3, seed=SUITE_SEED)
    solid = embedded(lebesgue_ball(2, 50000, SUITE_SEED), "generic", ambient_dim=3, seed=SUITE_SEED + 1)
    thin_dim = box_counting_dim(thin, seed=SUITE_SEED).value
    solid_dim = box_counting_dim(solid, seed=SUITE_SEED).value
    highest, lowest = -math.inf, math.inf
    for _ in range(planes):
        V = Frame.random(3, 2, rng)
        highest = max(highest, box_counting_dim(project_points(V, thin), seed=SUITE_SEED).value - thin_dim)
        lowest = min(lowest, box_counting_dim(project_points(V, solid), seed=SUITE_SEED).value - (solid_dim - 1))
    passed = highest <= 0.1 and lowest >= -0.1
    return passed, (f"{planes} planes: projected − dim μ at most {highest:.3f}, "
                    f"projected − (dim μ − 1) at least {lowest:.3f}")


def check_energy_trend():
    mu = line_cantor(1.0, 12)
    finite = energy_diagnostic(mu, 0.5, seed=SUITE_SEED)
    divergent = energy_diagnostic(mu, 1.2, seed=SUITE_SEED)
    passed = finite.finite_trend and not divergent.finite_trend
    return passed, (f"t=0.5 last ratio {finite.ratios[-1]:.3f}, "
                    f"t=1.2 last ratio {divergent.ratios[-1]:.3f}")


def check_calibration():
    corner = box_counting_dim(four_corner_cantor(8), seed=SUITE_SEED).value
    cantor = correlation_dim(line_cantor(math.log(2) / math.log(3), 10), seed=SUITE_SEED).value
    square = box_counting_dim(uniform_square(10 ** 5, SUITE_SEED), seed=SUITE_SEED).value
    passed = 0.9 <= corner <= 1.1 and 0.58 <= cantor <= 0.68 and 1.9 <= square <= 2.1
    return passed, f"four-corner {corner:.3f}, middle-thirds {cantor:.3f}, square {square:.3f}"


def transversality_config(family, l, seed=SUITE_SEED):
    return ExperimentConfig.from_dict({"mode": "transversality", "seed": seed, "family": family, "l": l,
                                       "panel": 4})


def bound_check_config(seed=SUITE_SEED):
    return ExperimentConfig.from_dict({
        "mode": "bound_check", "seed": seed, "family": FAMILY_N3, "lambda_grid": [64],
        "measure": {"variant": "embedded", "inner": {"variant": "four_corner_cantor", "level": 8},
                    "frame": "generic", "ambient_dim": 3, "seed": 11},
    })


def sharpness_config(seed=SUITE_SEED):
    return ExperimentConfig.from_dict({
        "mode": "sharpness", "seed": seed, "n": 3, "m": 2, "k": 1, "l": 1, "p": 1,
        "s": math.log(2) / math.log(3), "n_points": 100000, "level": 12, "lambda_grid": [64],
        "tolerance": 0.15,
    })


def check_transversality():
    low = run_transversality(transversality_config(FAMILY_N3, 0)).summary["median_exponent"]
    high = run_transversality(transversality_config(FAMILY_N4, 1)).summary["median_exponent"]
    passed = low is not None and high is not None and 0.85 <= low <= 1.15 and 2.6 <= high <= 3.4
    return passed, f"n=3 family r̂ = {low}, extended n=4 family r̂ = {high}"


def check_bound_pipeline():
    report = run_bound_check(bound_check_config())
    fraction = report.summary["fraction_at_bound"]
    return fraction >= 0.95, f"{fraction:.1%} of rows at or above bound − tolerance"


def check_sharpness_pipeline():
    report = run_sharpness(sharpness_config())
    fraction = report.summary["fraction_in_window"]
    return fraction >= 0.9, f"{fraction:.1%} of rows within the pinch window"


def _report_bytes(report, out):
    """Bytes of every written artifact except runtime.json, keyed by relative path."""
    out = write_report(report, out)
    return {path.relative_to(out).as_posix(): path.read_bytes()
            for path in sorted(out.rglob("*")) if path.is_file() and path.name != "runtime.json"}


def determinism_runs():
    return [
        ("transversality", run_transversality, transversality_config(FAMILY_N3, 0)),
        ("bound_check", run_bound_check, bound_check_config()),
        ("sharpness", run_sharpness, sharpness_config()),
    ]


def check_determinism(runs=None):
    """Run each (name, runner, config) twice and compare the written files byte for byte."""
    runs = runs or determinism_runs()
    differing = []
    with tempfile.TemporaryDirectory() as tmp:
        for name, runner, cfg in runs:
            first, second = (_report_bytes(runner(cfg), Path(tmp) / name / attempt) for attempt in ("a", "b"))
            if first != second:
                changed = sorted(p for p in first.keys() | second.keys() if first.get(p) != second.get(p))
                differing.append(f"{name}: {', '.join(changed)}")
    if differing:
        return False, "; ".join(differing)
    return True, f"identical report files for {len(runs)} modes"


def suite(p_function=p_of_l):
    """(name, check, slow) in execution order."""
    return [
        ("multivec.cauchy_binet_oracle", check_multivec_oracle, False),
        ("multivec.wedge_determinant", check_wedge_determinant, False),
        ("grassmann.tangent_derivative_order", check_tangent_derivative, False),
        ("grassmann.complement_projector", check_complement_projector, False),
        ("grassmann.rotate_norm", check_rotate_norm, False),
        ("grassmann.chart_injectivity", check_chart_injectivity, False),
        ("family.p_enumeration", lambda: check_p_enumeration(p_function), False),
        ("family.p_monotone", lambda: check_p_monotone(p_function), False),
        ("family.klimits_scan", lambda: check_klimits(p_function), False),
        ("family.projbound", check_projbound, False),
        ("family.images", check_images, False),
        ("family.extended_plane_derivative", check_extended_derivative, False),
        ("family.extension_margin", check_extension, False),
        ("family.bound_monotone_in_d", check_bound_monotone, False),
        ("family.reparametrization_invariance", check_reparametrization, False),
        ("dimest.energy_trend", check_energy_trend, False),
        ("dimest.rotation_invariance", check_rotation_invariance, False),
        ("dimest.natural_bands", check_natural_bands, False),
        ("dimest.calibration", check_calibration, False),
        ("lab.transversality_exponents", check_transversality, True),
        ("lab.bound_check", check_bound_pipeline, True),
        ("lab.sharpness", check_sharpness_pipeline, True),
        ("lab.determinism", check_determinism, True),
    ]


def _matches(name, pattern):
    if not pattern:
        return True
    if not any(ch in pattern for ch in "*?["):
        pattern = f"*{pattern}*"
    return fnmatch.fnmatch(name, pattern)


def run_verify_suite(pattern=None, include_slow=False, p_function=p_of_l):
    """Run the matching checks; failures and crashes become rows, never exceptions."""
    rows = []
    for name, check, slow in suite(p_function):
        if not _matches(name, pattern) or (slow and not include_slow):
            continue
        step(f"Running {name}")
        try:
            passed, detail = check()
        except Exception as e:
            passed, detail = False, f"raised {type(e).__name__}: {e}"
        rows.append({"name": name, "passed": bool(passed), "detail": detail, "slow": slow})
    return rows
