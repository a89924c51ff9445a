import math

import numpy as np
import pytest

from conelift.config import DEFAULT
from conelift.doublepoints import (
    ISOLATED,
    SHEET,
    DoublePointRecord,
    _bin_pairs,
    batch_refine,
    check_condition2,
    check_multiple_point,
    count_preimages,
    find_double_points,
    phase_distance,
    projective_distance,
    refine_pair,
    transversality,
)
from conelift.models import HLParams, TrivialConeParams, clifford_torus, hl_immersion, hl_perturbed, trivial_cone_immersion

THIRD = 2 * math.pi / 3


def test_distances_ignore_phase(rng):
    h = rng.normal(size=3) + 1j * rng.normal(size=3)
    h /= np.linalg.norm(h)
    assert projective_distance(h, np.exp(0.9j) * h) < 1e-7
    assert phase_distance(h, np.exp(0.9j) * h) < 1e-14
    assert phase_distance(h, np.roll(h, 1)) > 1e-3


def test_refine_converges_to_hl_triple_point():
    f = hl_immersion(HLParams(3, 0.0))
    p = np.array([0.4, 1.0])
    sol = refine_pair(f, p + 0.05, p + THIRD - 0.03)
    assert sol.residual < 1e-12
    d = np.mod(sol.q - sol.p, 2 * math.pi)
    assert np.allclose(d, [THIRD, THIRD], atol=1e-9)


def test_refine_fixed_q():
    f = hl_immersion(HLParams(3, 0.0))
    q = np.array([0.4, 1.0])
    sol = refine_pair(f, q + THIRD + 0.02, q, fixed_q=True)
    assert np.allclose(sol.q, q)
    assert sol.residual < 1e-12


def test_batch_refine_matches_single():
    f = hl_immersion(HLParams(3, 0.1))
    P = np.array([[0.1, 2.0], [1.0, 0.5]])
    Q = P + THIRD + 0.04
    P2, Q2, res = batch_refine(f, P, Q)
    assert np.all(res < 1e-10)
    for p, q in zip(P2, Q2):
        assert phase_distance(f(p), f(q)) < 1e-10


def test_bin_pairs_is_order_free():
    P = np.array([[0.1, 0.1], [2.0, 2.0], [0.11, 0.1]])
    Q = np.array([[2.0, 2.0], [0.1, 0.1], [2.0, 2.01]])
    A, B = _bin_pairs(P, Q, 0.5)
    assert len(A) == 1
    assert np.allclose(A[0], [0.1, 0.1]) and np.allclose(B[0], [2.0, 2.0])


def test_clifford_embedded():
    assert find_double_points(clifford_torus(), 12) == []


def test_trivial_cone_sheet():
    recs = find_double_points(trivial_cone_immersion(TrivialConeParams()), 12)
    assert len(recs) == 1 and recs[0].kind == SHEET


def test_perturbed_hl_points_transverse():
    f = hl_perturbed(HLParams(3, 0.1))
    recs = find_double_points(f, 24)
    assert len(recs) == 4
    assert all(r.kind == ISOLATED and r.transverse for r in recs)
    assert all(r.min_singular > 1e-3 for r in recs)
    reports = check_condition2(f, recs)
    assert all(rep.passed for rep in reports)
    assert all(r.separation is not None for r in recs)


def test_transversality_zero_on_family():
    f = hl_immersion(HLParams(3, 0.0))
    p = np.array([0.4, 1.0])
    assert transversality(f, p, p + THIRD) < 1e-8


def test_condition2_flags_zero_separation():
    f = hl_immersion(HLParams(3, 0.0))
    p = np.array([0.4, 1.0])
    rec = DoublePointRecord(p, p.copy(), 0.0, ISOLATED)
    (rep,) = check_condition2(f, [rec])
    assert not rep.passed and rep.min_distance_from_zero < DEFAULT.sep_margin


def test_preimages_and_multiple_point():
    f = hl_immersion(HLParams(3, 0.0))
    pre = count_preimages(f, np.array([0.37, 1.21]), 24)
    assert len(pre) == 3
    seps, ok = check_multiple_point(f, pre)
    assert ok
    assert sorted(round(float(s), 6) for s in seps) == sorted([round(THIRD, 6), round(2 * THIRD, 6)])


def test_detail_result_and_density_guard():
    f = clifford_torus()
    res = find_double_points(f, 8, detail=True)
    assert res.records == [] and res.candidates >= 0
    with pytest.raises(ValueError):
        find_double_points(f, 4)
