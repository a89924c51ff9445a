import json
import math

import numpy as np
import pytest

from conelift.grids import (
    GridDiagram,
    GridError,
    HypercubeDiagram,
    RadialGridDiagram,
    SchemaError,
    SmoothingOverlapError,
    arc_delta_t,
    build_product_immersion,
    cell_value,
    grid_from_json,
    grid_to_json,
    hypercube_from_grids,
    hypercube_from_json,
    hypercube_to_json,
    load_fixture,
    load_json,
    loop_vertices,
    product_lift_condition,
    radial_holonomy,
    shoelace_area,
    smooth_loop,
    smoothed_crossing_cells,
    to_radial,
    validate_hypercube,
    validate_lagrangian_grid,
    validate_radial_grid,
)
from conelift.lifting import check_condition1
from conelift.quadrature import adaptive_simpson

A = GridDiagram((0, 1, 3, 4, 2), (1, 2, 0, 3, 4))
B = GridDiagram((0, 4, 2, 3, 1), (2, 1, 4, 0, 3))


def _fixture(name):
    return [grid_from_json(g) for g in load_fixture(name)["grids"]]


def _random_knot(rng, n):
    while True:
        xs = rng.permutation(n)
        os_ = rng.permutation(n)
        if np.any(xs == os_):
            continue
        g = GridDiagram(tuple(xs), tuple(os_))
        if g.is_knot():
            return g


def test_marking_validation():
    with pytest.raises(GridError):
        GridDiagram((0, 1), (0, 1))
    with pytest.raises(GridError):
        GridDiagram((0, 0), (1, 1))
    with pytest.raises(GridError):
        GridDiagram.from_markings(2, [(0, 0), (0, 1)], [(0, 1), (1, 0)])
    link = GridDiagram((0, 1, 2, 3), (1, 0, 3, 2))
    assert not link.is_knot()
    assert validate_lagrangian_grid(link).violations[0]["condition"] == "knot"


def test_unit_grid_passes():
    rep = validate_lagrangian_grid(GridDiagram((0,), (0,)))
    assert rep.passed and rep.crossing_list == []


def test_fixture_crossings():
    ra, rb = to_radial(A), to_radial(B)
    assert [c.area for c in ra.crossings()] == [-3]
    assert [c.area for c in rb.crossings()] == [-2, -2]
    assert validate_lagrangian_grid(A).passed and validate_lagrangian_grid(B).passed
    assert math.isclose(abs(ra.crossings()[0].delta_t), 3 * 2 * math.pi / 75)


def test_total_area_matches_shoelace(rng):
    for _ in range(5):
        g = _random_knot(rng, 6)
        rep = validate_lagrangian_grid(g)
        verts = loop_vertices(to_radial(g))[:-1]
        assert math.isclose(rep.signed_area_total, shoelace_area(verts), abs_tol=1e-9)


def test_shoelace_orientation():
    square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    assert shoelace_area(square) == -1.0


def test_cells_have_equal_area():
    for n in (3, 5, 7):
        areas = RadialGridDiagram(GridDiagram(tuple(range(n)), tuple(np.roll(range(n), 1)))).cell_areas()
        assert np.max(np.abs(areas - math.pi / (3 * n * n))) < 1e-12
        # t changes by twice the enclosed area
        assert math.isclose(2 * areas[0, 0], cell_value(n))


def _tau_along(z, dz, lo, hi):
    return adaptive_simpson(lambda s: np.imag(np.conj(z(s)) * dz(s)), lo, hi, 1e-13)


def test_arc_and_ray_delta_t():
    n, row, angle = 5, 3, 2.2
    r = math.sqrt((row + 1) / (3 * n))
    arc = _tau_along(lambda s: r * np.exp(1j * s), lambda s: 1j * r * np.exp(1j * s), 0.0, angle)
    assert abs(arc - arc_delta_t(n, row, angle)) < 1e-9
    ray = _tau_along(lambda s: s * np.exp(0.7j), lambda s: np.exp(0.7j) + 0 * s, 0.1, 0.6)
    assert abs(ray) < 1e-15


def test_holonomy_examples():
    assert radial_holonomy(to_radial(A)).winding == 0
    c, d = _fixture("radial_grid4")
    for r in (c, d):
        h = radial_holonomy(r)
        assert h.winding == 1 and h.cells == 3 * 7 * 7
        assert validate_radial_grid(r).passed
    long_way = to_radial(A, (1, 0, 0, 0, 0))
    assert not radial_holonomy(long_way).liftable


def test_product_lift_examples():
    res = product_lift_condition(to_radial(A).crossings(), to_radial(A).crossings())
    assert not res.passed and res.witness is not None
    unit = to_radial(GridDiagram((0,), (0,)))
    assert product_lift_condition(unit.crossings(), to_radial(B).crossings()).passed
    assert product_lift_condition(to_radial(A).crossings(), to_radial(B).crossings()).passed
    assert not product_lift_condition([0.5], [0.5 - 2 * math.pi], modular=True).passed
    assert product_lift_condition([0.5], [0.5 - 2 * math.pi]).passed


def test_hypercube_from_fixture_pair():
    h = hypercube_from_grids(A, B)
    assert h.g_wy() == A and h.g_zx() == B
    rep = validate_hypercube(h)
    assert rep.passed, rep.violations
    stored = hypercube_from_json(load_fixture("hypercube_pair"))
    assert validate_hypercube(stored).passed


def test_hypercube_duplicate_marking():
    h = hypercube_from_grids(A, B)
    marks = {k: list(v) for k, v in h.markings.items()}
    marks["W"][1] = marks["W"][0]
    rep = validate_hypercube(HypercubeDiagram(5, marks))
    assert any(v["condition"] == 1 and "2 W" in v["detail"] for v in rep.violations)


def test_hypercube_forbidden_flat():
    marks = {
        "W": [(0, 0, 0, 0), (1, 1, 1, 1)],
        "X": [(1, 0, 0, 0), (0, 1, 1, 1)],
        "Y": [(1, 0, 1, 0), (0, 1, 0, 1)],
        "Z": [(0, 1, 1, 1), (0, 1, 0, 0)],
    }
    rep = validate_hypercube(HypercubeDiagram(2, marks))
    assert any(v["condition"] == 4 and v["where"].startswith("wy-flat") for v in rep.violations)


def test_hypercube_outside():
    marks = {L: [(0, 0, 0, 0)] for L in "WXYZ"}
    marks["Z"] = [(0, 0, 0, 3)]
    rep = validate_hypercube(HypercubeDiagram(1, marks))
    assert rep.violations[0]["condition"] == 0


def test_smoothing_preserves_area_and_crossings():
    for r in (to_radial(A), to_radial(B)):
        pl = validate_lagrangian_grid(r.base)
        loop = smooth_loop(r)
        half = smooth_loop(r, 0.5 * loop.rho)
        assert abs(loop.total_area - pl.signed_area_total) < 1e-12
        for c in r.crossings():
            a, b = smoothed_crossing_cells(loop, c), smoothed_crossing_cells(half, c)
            assert abs(a - b) < 1e-2
            assert abs(a - c.area) < 1e-2


def test_smooth_loop_derivative():
    loop = smooth_loop(to_radial(B))
    th = np.array([0.3, 1.7, 4.0, 5.9])
    h = 1e-6
    _, dz = loop.complex_point(th)
    zp, _ = loop.complex_point(th + h)
    zm, _ = loop.complex_point(th - h)
    assert np.allclose((zp - zm) / (2 * h), dz, atol=1e-6)


def test_smoothing_overlap():
    with pytest.raises(SmoothingOverlapError):
        smooth_loop(to_radial(A), 0.8)
    with pytest.raises(SmoothingOverlapError):
        smooth_loop(to_radial(A), 0.0)


def test_product_immersion_liftable():
    torus = build_product_immersion(to_radial(A), to_radial(B))
    f = torus.immersion
    assert all(r.passed for r in check_condition1(f))
    assert max(f.lagrangian_residual(x) for x in f.domain.grid(6)) < 1e-12


def test_json_round_trip():
    for r in _fixture("radial_grid4"):
        assert grid_from_json(json.loads(json.dumps(grid_to_json(r)))) == r
    h = hypercube_from_grids(A, B)
    back = hypercube_from_json(hypercube_to_json(h))
    assert {k: [tuple(c) for c in v] for k, v in back.markings.items()} == {k: [tuple(c) for c in v] for k, v in h.markings.items()}


@pytest.mark.parametrize(
    "obj, where",
    [
        ({"x": [], "o": []}, "$"),
        ({"size": 2, "x": [[0, 0], [1, 1]], "o": [[0, 1], [1, 5]]}, "$.o[1]"),
        ({"size": 2, "x": [[0, 0], [1, "a"]], "o": [[0, 1], [1, 0]]}, "$.x[1]"),
        ({"size": 2, "x": [[0, 0], [1, 1]], "o": [[0, 1], [1, 0]], "arc_choices": [0, 2]}, "$.arc_choices"),
        ({"size": 2, "x": [[0, 0], [0, 1]], "o": [[0, 1], [1, 0]]}, "$"),
    ],
)
def test_schema_errors(obj, where):
    with pytest.raises(SchemaError) as err:
        grid_from_json(obj)
    assert err.value.path == where


def test_load_json_reports_position(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "size": 3,\n  "x": [1, 2\n}')
    with pytest.raises(SchemaError) as err:
        load_json(bad)
    assert "line 4" in str(err.value)
