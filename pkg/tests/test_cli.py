import csv
import io
import json
import subprocess
import sys

import pytest

from conelift.cli import main
from conelift.grids import GridDiagram, grid_from_json, hypercube_from_grids, hypercube_to_json, load_fixture


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_hl_special(capsys):
    code, out, _ = run(capsys, "verify", "--model", "hl", "--eps", "0", "--special", "--samples", "8")
    assert code == 0
    report = json.loads(out)
    assert report["pass"] is True


def test_verify_clifford_fails(capsys):
    code, out, _ = run(capsys, "verify", "--model", "clifford", "--samples", "8")
    assert code == 1
    assert json.loads(out)["pass"] is False


def test_reports_are_deterministic(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert main(["verify", "--model", "hl-perturbed", "--eps", "0.1", "--samples", "8", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_lift_csv(capsys):
    code, out, _ = run(capsys, "lift", "--model", "hl", "--eps", "0.1", "--samples", "8", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["x1", "x2", "t", "re1", "im1", "re2", "im2", "re3", "im3"]
    assert len(rows) - 1 == 64


def test_lift_obj_vertex_count(capsys):
    code, out, _ = run(capsys, "lift", "--model", "trivial", "--samples", "8", "--format", "obj")
    assert code == 0
    lines = out.splitlines()
    assert sum(1 for line in lines if line.startswith("v ")) == 64
    assert sum(1 for line in lines if line.startswith("f ")) > 0


def test_lift_clifford_reports_holonomy(capsys):
    code, out, err = run(capsys, "lift", "--model", "clifford", "--samples", "8")
    assert code == 1
    assert "condition 1" in err
    gens = json.loads(out)["generators"]
    assert len(gens) == 2 and not any(g["pass"] for g in gens)


def test_doublepoints_csv(capsys):
    code, out, _ = run(capsys, "doublepoints", "--model", "hl-perturbed", "--eps", "0.1", "--grid", "16", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 4 and all(r["kind"] == "isolated" and r["pass"] == "True" for r in rows)


def test_grid_validate_fixture(capsys):
    code, out, _ = run(capsys, "grid", "validate", "--fixture", "radial_grid_pair")
    assert code == 0
    grids = json.loads(out)["grids"]
    assert [[c["cells"] for c in g["crossings"]] for g in grids] == [[-3], [-2, -2]]


def test_product_lift_check(capsys):
    code, out, _ = run(capsys, "grid", "product-lift-check", "--fixture", "radial_grid_pair")
    assert code == 0 and json.loads(out)["pass"] is True


def test_to_radial_round_trip(tmp_path, capsys):
    src = load_fixture("radial_grid4")
    code, out, _ = run(capsys, "grid", "to-radial", "--fixture", "radial_grid4")
    assert code == 0
    back = [grid_from_json(g) for g in json.loads(out)["grids"]]
    assert back == [grid_from_json(g) for g in src["grids"]]
    single = tmp_path / "one.json"
    single.write_text(json.dumps(src["grids"][0]))
    code, out, _ = run(capsys, "grid", "to-radial", "--input", str(single), "--arcs", "0,0,0,0,0,0,0")
    assert code == 0
    # all short arcs: the net area is not a whole turn, so no winding number
    assert json.loads(out)["holonomy"]["winding"] is None


def test_bad_inputs_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"size": 3,, }')
    code, _, err = run(capsys, "grid", "validate", "--input", str(bad))
    assert code == 2 and "line 1" in err
    code, _, _ = run(capsys, "grid", "validate", "--input", str(tmp_path / "missing.json"))
    assert code == 2
    code, _, _ = run(capsys, "grid", "to-radial", "--fixture", "radial_grid4", "--arcs", "0,1")
    assert code == 2
    code, _, _ = run(capsys, "verify", "--model", "hl", "--eps", "0.3", "--samples", "8")
    assert code == 2
    code, _, _ = run(capsys, "verify", "--model", "hl", "--samples", "4")
    assert code == 2


def test_hypercube_input(tmp_path, capsys):
    a = GridDiagram((0, 1, 3, 4, 2), (1, 2, 0, 3, 4))
    b = GridDiagram((0, 4, 2, 3, 1), (2, 1, 4, 0, 3))
    obj = hypercube_to_json(hypercube_from_grids(a, b))
    good = tmp_path / "good.json"
    good.write_text(json.dumps(obj))
    assert run(capsys, "grid", "validate", "--input", str(good))[0] == 0
    obj["W"][1] = obj["W"][0]
    dup = tmp_path / "dup.json"
    dup.write_text(json.dumps(obj))
    code, out, _ = run(capsys, "grid", "validate", "--input", str(dup))
    assert code == 1
    assert any(v["condition"] == 1 for v in json.loads(out)["hypercube"]["violations"])
    assert run(capsys, "grid", "to-radial", "--input", str(good))[0] == 2


def test_tolerance_flag(capsys):
    code, out, _ = run(capsys, "verify", "--model", "hl", "--samples", "8", "--tol.legendrian_tol", "1e-20")
    assert code == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "conelift", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "grid" in proc.stdout
