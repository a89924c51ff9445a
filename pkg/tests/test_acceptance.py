"""The twelve acceptance criteria, each at its target tolerance.

Every test records one pass/fail line, printed in the terminal summary.
Criteria that cannot be met are left failing with the measured numbers.
"""

import math
import time

import numpy as np
import pytest

from conftest import record
from conelift.cli import RunConfig, certify_product
from conelift.config import circular_distance
from conelift.doublepoints import CIRCLE, ISOLATED, check_multiple_point, count_preimages, find_double_points, refine_pair
from conelift.grids import build_product_immersion, grid_from_json, load_fixture, product_lift_condition, radial_holonomy
from conelift.lifting import LiftedMap, build_lift, check_condition1, separation
from conelift.models import (
    HLParams,
    RadiusOverflowError,
    TrivialConeParams,
    hl_immersion,
    hl_perturbed,
    hl_t_closed_form,
    hl_t_exact,
    trivial_cone_immersion,
)
from conelift.verifier import (
    chart_identity_reports,
    trivial_special_criterion,
    verify_lagrangian_cone,
    verify_legendrian_lift,
    verify_special_lagrangian,
)

PI = math.pi


def _engine_vs_form(eps: float, form, grid: int = 64):
    """Max mod-2pi gap between the lifting integral and ``form`` on a grid,
    with the lift anchored at the form's value at the origin."""
    p = HLParams(3, eps)
    f = hl_immersion(p)
    base = np.zeros(2)
    lift = LiftedMap(f, base, float(form(p, base)), t_chart=3)
    params, states = lift.sample_grid(grid)
    gap = 0.0
    for x, st in zip(params, states):
        gap = max(gap, float(circular_distance(lift.t_of(x, st), form(p, x))))
    return gap


# ---------------------------------------------------------------- criterion 1
def test_criterion_01_closed_form_lift():
    results = []
    for eps in (0.0, 0.1, 0.3):
        try:
            start = time.perf_counter()
            gap = _engine_vs_form(eps, hl_t_closed_form)
            elapsed = time.perf_counter() - start
            ok = gap < 1e-8 and elapsed < 30.0
            note = f"eps={eps}: max|t-t_eps|={gap:.2e} in {elapsed:.1f}s"
            if not ok and eps > 0:
                exact = _engine_vs_form(eps, hl_t_exact)
                note += f" (vs corrected form {exact:.1e})"
        except RadiusOverflowError as exc:
            ok, note = False, f"eps={eps}: not admissible ({exc})"
        results.append((ok, note))
    passed = all(ok for ok, _ in results)
    record(1, passed, "; ".join(n for _, n in results))
    assert passed, results


# ---------------------------------------------------------------- criterion 2
def test_criterion_02_holonomy():
    worst = 0.0
    for eps in (0.0, 0.1, 0.13):
        for rep in check_condition1(hl_immersion(HLParams(3, eps))):
            worst = max(worst, abs(rep.holonomy))
    passed = worst < 1e-7
    record(2, passed, f"max |holonomy mod 2pi| over both generators, eps in {{0, 0.1, 0.13}}: {worst:.2e}")
    assert passed


# ---------------------------------------------------------------- criterion 3
EXPECTED_TRANSVERSE = [
    ((2 * PI / 3, PI / 6), (4 * PI / 3, 5 * PI / 6)),
    ((5 * PI / 3, 7 * PI / 6), (PI / 3, 11 * PI / 6)),
    ((2 * PI / 3, 7 * PI / 6), (4 * PI / 3, 11 * PI / 6)),
    ((5 * PI / 3, PI / 6), (PI / 3, 5 * PI / 6)),
]


def _torus_gap(a, b) -> float:
    return float(np.max(circular_distance(np.asarray(a), np.asarray(b))))


def _pair_gap(rec, pair) -> float:
    p, q = pair
    return min(max(_torus_gap(rec.p, p), _torus_gap(rec.q, q)), max(_torus_gap(rec.p, q), _torus_gap(rec.q, p)))


def test_criterion_03_perturbed_hl_double_points():
    recs = find_double_points(hl_perturbed(HLParams(3, 0.1)), 32)
    iso = [r for r in recs if r.kind == ISOLATED and r.transverse]
    gaps = [min(_pair_gap(r, e) for r in iso) if iso else math.inf for e in EXPECTED_TRANSVERSE]
    passed = len(recs) == 4 and len(iso) == 4 and max(gaps) < 1e-6
    record(3, passed, f"{len(recs)} records, {len(iso)} isolated transverse, max location error {max(gaps):.1e}")
    assert passed


# ---------------------------------------------------------------- criterion 4
SUM_PAIRS = [(7 * PI / 6, 11 * PI / 6), (5 * PI / 6, PI / 6)]


def _family_relations(p, q) -> float:
    """Distance from satisfying one of the offset/sum relations."""
    best = math.inf
    for a, b in ((p, q), (q, p)):
        d = np.mod(np.asarray(a) - np.asarray(b), 2 * PI)
        for off in (2 * PI / 3, 4 * PI / 3):
            off_err = _torus_gap(d, [off, off])
            for sa, sb in SUM_PAIRS:
                sum_err = max(float(circular_distance(np.sum(a), sa)), float(circular_distance(np.sum(b), sb)))
                best = min(best, max(off_err, sum_err))
    return best


@pytest.fixture(scope="module")
def hl_families():
    f = hl_immersion(HLParams(3, 0.1))
    return f, find_double_points(f, 32)


def test_criterion_04_hl_circles(hl_families):
    f, recs = hl_families
    circles = [r for r in recs if r.kind == CIRCLE]
    err = max(_family_relations(p, q) for r in circles for p, q in r.samples) if circles else math.inf
    count = sum(len(r.samples) for r in circles)
    passed = len(recs) == 2 and len(circles) == 2 and err < 1e-8
    record(4, passed, f"{len(circles)} circle families of {len(recs)} records, max relation error {err:.1e} over {count} samples")
    assert passed


# ---------------------------------------------------------------- criterion 5
def _family_points(f, rec, count: int = 32):
    """``count`` refined double points spread along a circle family."""
    p0, q0 = rec.samples[0]
    offset = np.mod(np.asarray(q0) - np.asarray(p0), 2 * PI)
    s = float(np.sum(p0))
    out = []
    for u in np.linspace(0.0, 2 * PI, count, endpoint=False):
        p = np.array([u, s - u])
        sol = refine_pair(f, p, p + offset)
        assert sol.residual < 1e-10
        out.append((sol.p, sol.q))
    return out


def test_criterion_05_separation_window(hl_families):
    f, recs = hl_families
    centre = -8 * PI / 6
    seps = []
    for rec in recs:
        if rec.kind != CIRCLE:
            continue
        vals = np.array([separation(f, p, q) for p, q in _family_points(f, rec)])
        # (p, q) and (q, p) name the same double point with opposite
        # separations; fix one orientation per family, chosen from its mean
        mean = float(np.angle(np.mean(np.exp(1j * vals))))
        if circular_distance(-mean, centre) < circular_distance(mean, centre):
            vals = -vals
        seps.append(vals)
    worst = max(max(float(circular_distance(v, centre)) for v in vals) for vals in seps) if seps else math.inf
    spread = [f"{float(np.angle(np.mean(np.exp(1j * v)))):.4f}" for v in seps]
    passed = len(seps) == 2 and worst < 1.0 / 3.0
    record(5, passed, f"family separations {spread} (mod 2pi), max distance from -4pi/3 = {worst:.3f}, window 1/3")
    assert passed


# ---------------------------------------------------------------- criterion 6
def test_criterion_06_cover_degree():
    f0 = hl_immersion(HLParams(3, 0.0))
    x = np.array([0.37, 1.21])
    pre = count_preimages(f0, x, 32)
    seps, distinct = check_multiple_point(f0, pre)
    cone = trivial_cone_immersion(TrivialConeParams())
    y = np.array([0.3, -0.5, 0.8])
    y = y / np.linalg.norm(y)
    pre_t = count_preimages(cone, y, 32)
    antipodal = len(pre_t) == 2 and np.allclose(pre_t[1], -pre_t[0], atol=1e-8)
    passed = len(pre) == 3 and distinct and antipodal
    record(6, passed, f"f0: {len(pre)} preimages, separations {np.round(seps, 4).tolist()}; trivial cone: {len(pre_t)} (antipodal={antipodal})")
    assert passed


# ---------------------------------------------------------------- criterion 7
def test_criterion_07_perturbed_trivial_cone():
    f = trivial_cone_immersion(TrivialConeParams((1, 1, 1), 0.1))
    recs = find_double_points(f, 24)
    iso = [r for r in recs if r.kind == ISOLATED]
    passed = len(recs) == 3 and len(iso) == 3
    classes = sorted(int(np.sum(np.abs(r.p) > 1e-6)) for r in recs)
    record(7, passed, f"{len(iso)} isolated double points (expected 3); antipodal pairs with support sizes {classes}")
    assert passed


# ---------------------------------------------------------------- criterion 8
def _liftable_models():
    yield "hl eps=0", hl_immersion(HLParams(3, 0.0))
    yield "hl eps=0.1", hl_immersion(HLParams(3, 0.1))
    yield "hl-perturbed eps=0.1", hl_perturbed(HLParams(3, 0.1))
    yield "trivial", trivial_cone_immersion(TrivialConeParams())
    yield "trivial eta=(1+i,1,1)", trivial_cone_immersion(TrivialConeParams((1 + 1j, 1, 1)))
    yield "trivial perturbed", trivial_cone_immersion(TrivialConeParams((1, 1, 1), 0.1))
    pair = load_fixture("radial_grid_pair")
    grids = [grid_from_json(g) for g in pair["grids"]]
    yield "grid pair torus", build_product_immersion(*grids).immersion


def test_criterion_08_legendrian():
    worst, names = 0.0, []
    for name, f in _liftable_models():
        if f.domain.kind == "torus":
            assert all(r.passed for r in check_condition1(f))
        rep = verify_legendrian_lift(build_lift(f, check=False), 32)
        worst = max(worst, rep.max_residual)
        names.append(f"{name}={rep.max_residual:.0e}")
    passed = worst < 1e-6
    record(8, passed, f"max alpha residual {worst:.1e} at 32^2 samples: " + ", ".join(names))
    assert passed


# ---------------------------------------------------------------- criterion 9
def test_criterion_09_cone():
    worst, names = 0.0, []
    for name, f in [
        ("hl eps=0", hl_immersion(HLParams(3, 0.0))),
        ("hl eps=0.1", hl_immersion(HLParams(3, 0.1))),
        ("trivial", trivial_cone_immersion(TrivialConeParams())),
        ("trivial eta=(1+i,1,1)", trivial_cone_immersion(TrivialConeParams((1 + 1j, 1, 1)))),
    ]:
        rep = verify_lagrangian_cone(build_lift(f), 16, radii=(0.5, 1.0, 2.0))
        worst = max(worst, rep.max_residual)
        names.append(f"{name}={rep.max_residual:.0e}")
    passed = worst < 1e-6
    record(9, passed, f"max omega0 residual {worst:.1e} at radii 0.5, 1, 2: " + ", ".join(names))
    assert passed


# ---------------------------------------------------------------- criterion 10
def test_criterion_10_special():
    hl = verify_special_lagrangian(build_lift(hl_immersion(HLParams(3, 0.0))), 16, phase=None)
    zero = []
    for eta in ((1, 1, 1), (1j, 1j, -1)):
        assert abs(trivial_special_criterion(eta)) < 1e-12
        zero.append(verify_special_lagrangian(build_lift(trivial_cone_immersion(TrivialConeParams(eta))), 12, phase=0.0))
    crit = trivial_special_criterion((1 + 1j, 1, 1))
    bad = verify_special_lagrangian(build_lift(trivial_cone_immersion(TrivialConeParams((1 + 1j, 1, 1)))), 12, phase=0.0)
    bent = verify_special_lagrangian(build_lift(hl_immersion(HLParams(3, 0.13))), 16, phase=None)
    passed = hl.passed and all(r.passed for r in zero) and abs(crit - 1.0) < 1e-12 and not bad.passed and not bent.passed
    record(10, passed, f"HL eps=0 {hl.max_residual:.0e}; zero-criterion cones {[f'{r.max_residual:.0e}' for r in zero]}; "
                       f"eta=(1+i,1,1): criterion {crit:g}, residual {bad.max_residual:.3f} at phase 0; "
                       f"HL eps=0.13 best-phase residual {bent.max_residual:.3f}")
    assert passed


# ---------------------------------------------------------------- criterion 11
def test_criterion_11_grid_pipeline():
    pair = [grid_from_json(g) for g in load_fixture("radial_grid_pair")["grids"]]
    mags = [sorted({round(abs(c.delta_t), 12) for c in r.crossings()}) for r in pair]
    want = [[round(3 * 2 * PI / 75, 12)], [round(2 * 2 * PI / 75, 12)]]
    product = product_lift_condition(pair[0].crossings(), pair[1].crossings())
    report = certify_product(pair, RunConfig("grid", samples=16, grid=32))
    four = [grid_from_json(g) for g in load_fixture("radial_grid4")["grids"]]
    windings = [radial_holonomy(r).winding for r in four]
    lift_turns = [g.winding for g in check_condition1(build_product_immersion(*four).immersion)]
    liftable = all(g.passed for g in check_condition1(build_product_immersion(*four).immersion))
    passed = mags == want and product.passed and report["embedded"] and windings == [1, 1] and liftable and [abs(k) for k in lift_turns] == [1, 1]
    kinds = [r["kind"] for r in report["double_points"]]
    record(11, passed, f"|dt| {mags}, product lift {product.passed}, embedded {report['embedded']} "
                       f"({kinds.count('circle')} circles, {kinds.count('isolated')} isolated); radialGrid4 windings {windings}")
    assert passed


# ---------------------------------------------------------------- criterion 12
def test_criterion_12_chart_identities():
    start = time.perf_counter()
    reps = chart_identity_reports(3, 1000, 0)
    elapsed = time.perf_counter() - start
    core = {"darboux", "trivialized_alpha", "transition_cocycle", "reeb"}
    used = [r for r in reps if r.check_name in core]
    passed = len(used) == 4 and all(r.passed and r.samples >= 1000 for r in used) and elapsed < 120
    record(12, passed, ", ".join(f"{r.check_name}={r.max_residual:.0e}" for r in used) + f"; {elapsed:.1f}s")
    assert passed
