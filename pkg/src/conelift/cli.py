"""Command line: verify, lift, doublepoints and grid subcommands.

Exit codes: 0 success, 1 a check or condition failed, 2 bad input.
Reports are JSON documents with sorted keys, so identical runs produce
identical files; wall time is only recorded with ``--timing``.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import Tolerances
from .doublepoints import check_condition2, find_double_points
from .grids import (
    GridError,
    SchemaError,
    SmoothingOverlapError,
    build_product_immersion,
    grid_from_json,
    grid_to_json,
    hypercube_from_json,
    load_fixture,
    load_json,
    product_lift_condition,
    radial_holonomy,
    validate_hypercube,
    validate_lagrangian_grid,
    validate_radial_grid,
)
from .immersion import ImmersionError
from .lifting import Condition1Error, build_lift, check_condition1
from .models import (
    MODEL_NAMES,
    HLParams,
    TrivialConeParams,
    clifford_torus,
    hl_immersion,
    hl_perturbed,
    trivial_cone_immersion,
)
from .verifier import (
    VerificationReport,
    verify_lagrangian_cone,
    verify_lagrangian_projection,
    verify_legendrian_lift,
    verify_special_lagrangian,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(ValueError):
    """Bad command-line or file input (exit code 2)."""


@dataclass
class RunConfig:
    command: str
    model: Optional[str] = None
    n: int = 3
    eps: float = 0.0
    perturb: float = 0.0
    eta: tuple = (1.0, 1.0, 1.0)
    special: bool = False
    phase: Optional[float] = None
    samples: int = 32
    grid: int = 32
    seed: int = 0
    fmt: str = "json"
    out: Optional[str] = None
    input: Optional[str] = None
    fixture: Optional[str] = None
    action: Optional[str] = None
    arcs: Optional[tuple] = None
    timing: bool = False
    tol: Tolerances = field(default_factory=Tolerances)

    def validate(self) -> None:
        self.tol.validate()
        if self.samples < 8 or self.grid < 8:
            raise InputError("sample and grid densities must be at least 8")
        if self.command in ("verify", "lift", "doublepoints") and self.model is None and self.source is None:
            raise InputError("give --model or --input/--fixture")
        if self.model is not None and self.model not in MODEL_NAMES:
            raise InputError(f"unknown model {self.model!r}; choose from {', '.join(MODEL_NAMES)}")

    @property
    def source(self):
        return self.input or self.fixture


# ----------------------------------------------------------------------------
# inputs
# ----------------------------------------------------------------------------

def _load(cfg: RunConfig) -> dict:
    if cfg.fixture:
        try:
            return load_fixture(cfg.fixture)
        except FileNotFoundError as exc:
            raise InputError(f"no bundled fixture named {cfg.fixture!r}") from exc
    return load_json(cfg.input)


def _grid_list(obj) -> list:
    if isinstance(obj, dict) and "grids" in obj:
        if not isinstance(obj["grids"], list):
            raise SchemaError("expected a list of grids", "$.grids")
        return [grid_from_json(g, f"$.grids[{i}]") for i, g in enumerate(obj["grids"])]
    return [grid_from_json(obj)]


def build_model(cfg: RunConfig):
    """The immersion selected by ``--model`` or by a grid-pair input."""
    if cfg.model is None:
        grids = _grid_list(_load(cfg))
        if len(grids) != 2:
            raise InputError("an immersion input needs a pair of grids")
        return build_product_immersion(grids[0], grids[1], tol=cfg.tol).immersion
    if cfg.model == "hl":
        return hl_immersion(HLParams(cfg.n, cfg.eps))
    if cfg.model == "hl-perturbed":
        return hl_perturbed(HLParams(cfg.n, cfg.eps))
    if cfg.model == "trivial":
        return trivial_cone_immersion(TrivialConeParams(cfg.eta, cfg.perturb))
    return clifford_torus()


# ----------------------------------------------------------------------------
# output helpers
# ----------------------------------------------------------------------------

def _clean(obj):
    """JSON-safe copy: numpy scalars and arrays become plain Python values."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True) + "\n"


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _model_info(cfg: RunConfig) -> dict:
    if cfg.model is None:
        return {"input": cfg.source}
    info = {"model": cfg.model, "n": cfg.n}
    if cfg.model in ("hl", "hl-perturbed"):
        info["eps"] = cfg.eps
    if cfg.model == "trivial":
        info["eta"] = [str(complex(e)) for e in cfg.eta]
        info["perturb"] = cfg.perturb
    return info


def _condition1_report(reports, tol: Tolerances) -> VerificationReport:
    worst = max(reports, key=lambda r: abs(r.holonomy))
    return VerificationReport(
        "condition1_holonomy", abs(worst.holonomy), tol.hol_tol, len(reports), (),
        {"generators": [{"index": r.index, "holonomy": r.holonomy, "winding": r.winding, "pass": r.passed} for r in reports]},
    )


# ----------------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------------

def cmd_verify(cfg: RunConfig) -> int:
    start = time.perf_counter()
    f = build_model(cfg)
    checks = [verify_lagrangian_projection(f, cfg.samples, cfg.tol)]
    if f.domain.kind == "torus":
        c1 = check_condition1(f, cfg.tol)
        checks.append(_condition1_report(c1, cfg.tol))
        liftable = all(r.passed for r in c1)
    else:
        liftable = True
    if liftable:
        lift = build_lift(f, tol=cfg.tol, check=False)
        checks.append(verify_legendrian_lift(lift, cfg.samples, cfg.tol))
        checks.append(verify_lagrangian_cone(lift, cfg.samples, tol=cfg.tol))
        if cfg.special:
            checks.append(verify_special_lagrangian(lift, cfg.samples, cfg.phase, cfg.tol))
    ok = liftable and all(c.passed for c in checks)
    report = {"command": "verify", **_model_info(cfg), "samples": cfg.samples,
              "checks": [c.as_dict() for c in checks], "pass": ok}
    if cfg.timing:
        report["wall_time"] = time.perf_counter() - start
    _emit(cfg, dumps(report))
    return EXIT_OK if ok else EXIT_FAIL


def _sphere_uv(density: int):
    """Latitude-longitude grid on S^2 (poles excluded) with its triangles."""
    lat = (np.arange(density) + 0.5) / density * math.pi
    lon = np.arange(density) / density * 2 * math.pi
    la, lo = np.meshgrid(lat, lon, indexing="ij")
    pts = np.stack([np.sin(la) * np.cos(lo), np.sin(la) * np.sin(lo), np.cos(la)], axis=-1).reshape(-1, 3)
    faces = []
    for i in range(density - 1):
        for j in range(density):
            a, b = i * density + j, i * density + (j + 1) % density
            c, d = (i + 1) * density + j, (i + 1) * density + (j + 1) % density
            faces += [(a, b, d), (a, d, c)]
    return pts, faces


def _torus_faces(density: int):
    faces = []
    for i in range(density):
        for j in range(density):
            a = i * density + j
            b = i * density + (j + 1) % density
            c = ((i + 1) % density) * density + j
            d = ((i + 1) % density) * density + (j + 1) % density
            faces += [(a, b, d), (a, d, c)]
    return faces


def lift_samples(lift, density: int, mesh: bool = False):
    """Parameters, t values, lifted points and (for meshes) triangles."""
    dom = lift.f.domain
    faces = []
    if dom.kind == "torus":
        params, states = lift.sample_grid(density)
        if mesh:
            if dom.d != 2:
                raise InputError("OBJ export needs a two-dimensional domain")
            faces = _torus_faces(density)
    elif mesh or dom.d == 2:
        if dom.d != 2:
            raise InputError("OBJ export needs a two-dimensional domain")
        params, faces = _sphere_uv(density)
        states = [lift.state_at(x) for x in params]
        faces = faces if mesh else []
    else:
        params, states = lift.sample_grid(density)
    ts = np.array([lift.t_of(x, s) for x, s in zip(params, states)])
    pts = np.array([lift.point(x, s) for x, s in zip(params, states)])
    return np.asarray(params), ts, pts, faces


def format_csv(params, ts, pts) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    d = params.shape[1]
    n = pts.shape[1]
    w.writerow([f"x{i + 1}" for i in range(d)] + ["t"] + [f"{p}{k + 1}" for k in range(n) for p in ("re", "im")])
    for x, t, z in zip(params, ts, pts):
        row = [repr(float(v)) for v in x] + [repr(float(t))]
        for c in z:
            row += [repr(float(c.real)), repr(float(c.imag))]
        w.writerow(row)
    return buf.getvalue()


def format_obj(pts, faces, project=(0, 1, 2)) -> str:
    """Vertices from three real coordinates of the lifted points (interleaved
    re/im order), one face per triangle of the parameter grid."""
    real = np.stack([pts.real, pts.imag], axis=-1).reshape(len(pts), -1)
    lines = [f"# {len(pts)} vertices, {len(faces)} faces"]
    for v in real[:, list(project)]:
        lines.append("v " + " ".join(repr(float(c)) for c in v))
    for a, b, c in faces:
        lines.append(f"f {a + 1} {b + 1} {c + 1}")
    return "\n".join(lines) + "\n"


def cmd_lift(cfg: RunConfig) -> int:
    f = build_model(cfg)
    try:
        lift = build_lift(f, tol=cfg.tol, check=f.domain.kind == "torus")
    except Condition1Error as exc:
        gens = exc.report or []
        sys.stderr.write(f"condition 1 fails: {exc}\n")
        _emit(cfg, dumps({"command": "lift", **_model_info(cfg), "pass": False,
                          "generators": [{"index": r.index, "holonomy": r.holonomy, "pass": r.passed} for r in gens]}))
        return EXIT_FAIL
    params, ts, pts, faces = lift_samples(lift, cfg.samples, cfg.fmt == "obj")
    if cfg.fmt == "csv":
        _emit(cfg, format_csv(params, ts, pts))
    elif cfg.fmt == "obj":
        _emit(cfg, format_obj(pts, faces))
    else:
        _emit(cfg, dumps({"command": "lift", **_model_info(cfg), "pass": True, "a": lift.a,
                          "samples": [{"x": x, "t": t, "point": [[c.real, c.imag] for c in z]}
                                      for x, t, z in zip(params, ts, pts)]}))
    return EXIT_OK


def double_point_table(f, cfg: RunConfig):
    res = find_double_points(f, cfg.grid, cfg.tol, cfg.seed, detail=True)
    seps = check_condition2(f, res.records, cfg.tol)
    rows = []
    for rec, sep in zip(res.records, seps):
        row = rec.as_dict()
        row["separations"] = sep.separations
        row["min_separation"] = sep.min_distance_from_zero
        row["pass"] = sep.passed
        rows.append(row)
    return rows, res.failures


def cmd_doublepoints(cfg: RunConfig) -> int:
    start = time.perf_counter()
    f = build_model(cfg)
    rows, failures = double_point_table(f, cfg)
    if cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "p", "q", "nullity", "transverse", "separation", "pass"])
        for r in rows:
            w.writerow([r["kind"], " ".join(repr(v) for v in r["p"]), " ".join(repr(v) for v in r["q"]),
                        r["nullity"], r["transverse"], repr(r["separation"]), r["pass"]])
        _emit(cfg, buf.getvalue())
    else:
        report = {"command": "doublepoints", **_model_info(cfg), "grid": cfg.grid, "records": rows,
                  "count": len(rows), "newton_failures": failures}
        if cfg.timing:
            report["wall_time"] = time.perf_counter() - start
        _emit(cfg, dumps(report))
    return EXIT_OK


def _pair_product(grids):
    windings = [radial_holonomy(r).winding for r in grids]
    modular = any(w not in (0, None) for w in windings)
    return product_lift_condition(grids[0].crossings(), grids[1].crossings(), modular=modular), modular


def _grid_report(r) -> dict:
    planar = all(c == 0 for c in r.arc_choices)
    rep = validate_lagrangian_grid(r.base) if planar else validate_radial_grid(r)
    hol = radial_holonomy(r)
    out = rep.as_dict()
    out["holonomy"] = {"net": hol.net, "cells": hol.cells, "winding": hol.winding, "liftable": hol.liftable}
    return out


def cmd_grid(cfg: RunConfig) -> int:
    start = time.perf_counter()
    obj = _load(cfg)
    action = cfg.action
    if isinstance(obj, dict) and "W" in obj:
        if action != "validate":
            raise InputError(f"hypercube input supports only 'validate', not {action!r}")
        rep = validate_hypercube(hypercube_from_json(obj))
        _emit(cfg, dumps({"command": "grid", "action": action, "hypercube": rep.as_dict(), "pass": rep.passed}))
        return EXIT_OK if rep.passed else EXIT_FAIL
    grids = _grid_list(obj)
    if action == "validate":
        reports = [_grid_report(r) for r in grids]
        ok = all(r["pass"] for r in reports)
        _emit(cfg, dumps({"command": "grid", "action": action, "grids": reports, "pass": ok}))
        return EXIT_OK if ok else EXIT_FAIL
    if action == "to-radial":
        out = []
        for i, r in enumerate(grids):
            if cfg.arcs is not None:
                if len(grids) != 1 or len(cfg.arcs) != r.n:
                    raise InputError("--arcs needs a single grid and one bit per row")
                r = type(r)(r.base, cfg.arcs)
            hol = radial_holonomy(r)
            out.append(grid_to_json(r, radii=r.radii.tolist(), angles=r.angles.tolist(),
                                    holonomy={"net": hol.net, "winding": hol.winding}))
        _emit(cfg, dumps(out[0] if len(out) == 1 else {"grids": out}))
        return EXIT_OK
    if len(grids) != 2:
        raise InputError(f"'{action}' needs a pair of grids")
    if action == "product-lift-check":
        res, modular = _pair_product(grids)
        _emit(cfg, dumps({"command": "grid", "action": action, "modular": modular, "pass": res.passed,
                          "witness": res.witness,
                          "crossings": [[c.as_dict() for c in r.crossings()] for r in grids]}))
        return EXIT_OK if res.passed else EXIT_FAIL
    if action == "build-immersion":
        report = certify_product(grids, cfg)
        if cfg.timing:
            report["wall_time"] = time.perf_counter() - start
        _emit(cfg, dumps(report))
        return EXIT_OK if report["embedded"] else EXIT_FAIL
    raise InputError(f"unknown grid action {action!r}")


def certify_product(grids, cfg: RunConfig) -> dict:
    """Full chain for a grid pair: grid conditions, product lift condition,
    smoothing, condition 1, Legendrian and cone checks, double points and
    their separations."""
    grid_reports = [_grid_report(r) for r in grids]
    prod, modular = _pair_product(grids)
    torus = build_product_immersion(grids[0], grids[1], tol=cfg.tol)
    f = torus.immersion
    c1 = check_condition1(f, cfg.tol)
    checks = [verify_lagrangian_projection(f, cfg.samples, cfg.tol), _condition1_report(c1, cfg.tol)]
    liftable = all(r.passed for r in c1)
    rows, failures = [], []
    if liftable:
        lift = build_lift(f, tol=cfg.tol, check=False)
        checks.append(verify_legendrian_lift(lift, cfg.samples, cfg.tol))
        checks.append(verify_lagrangian_cone(lift, cfg.samples, tol=cfg.tol))
        rows, failures = double_point_table(f, cfg)
    dp_ok = all(r["pass"] for r in rows) and all(r["transverse"] is not False for r in rows)
    embedded = (
        all(g["pass"] for g in grid_reports) and prod.passed and liftable
        and all(c.passed for c in checks) and dp_ok
    )
    return {
        "command": "grid", "action": "build-immersion", "input": cfg.source,
        "grids": grid_reports,
        "product_lift": {"pass": prod.passed, "modular": modular, "witness": prod.witness},
        "smoothing_radius": [loop.rho for loop in torus.loops],
        "windings": [radial_holonomy(r).winding for r in grids],
        "lift_turns": [g.winding for g in c1],
        "checks": [c.as_dict() for c in checks],
        "double_points": rows, "newton_failures": failures,
        "embedded": embedded, "pass": embedded,
    }


# ----------------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------------

def _complex_list(text: str) -> tuple:
    try:
        return tuple(complex(v.strip().replace("i", "j")) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"cannot parse {text!r} as comma-separated complex numbers") from exc


def _bits(text: str) -> tuple:
    vals = tuple(int(v) for v in text.split(","))
    if any(v not in (0, 1) for v in vals):
        raise argparse.ArgumentTypeError("arc choices are 0/1 bits")
    return vals


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=MODEL_NAMES)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--perturb", type=float, default=0.0)
    p.add_argument("--eta", type=_complex_list, default=(1.0, 1.0, 1.0), help="comma-separated, e.g. 1+1j,1,1")
    p.add_argument("--special", action="store_true", help="also check the special Lagrangian condition")
    p.add_argument("--phase", type=float, default=None, help="phase for --special (default: best single phase)")
    p.add_argument("--samples", type=int, default=32, help="sample density per domain axis")
    p.add_argument("--grid", type=int, default=32, help="double point search density")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", dest="fmt", choices=("json", "csv", "obj"), default="json")
    p.add_argument("--out")
    p.add_argument("--input", help="grid JSON file")
    p.add_argument("--fixture", help="bundled fixture name, e.g. radial_grid_pair")
    p.add_argument("--timing", action="store_true", help="record wall time in reports")
    for f in dataclasses.fields(Tolerances):
        p.add_argument(f"--tol.{f.name}", dest=f"tol_{f.name}", type=type(f.default), default=f.default,
                       help=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conelift", description="Legendrian lifts of Lagrangian immersions into CP^{n-1}.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("verify", "run the certificates on a model"),
                       ("lift", "sample the Legendrian lift"),
                       ("doublepoints", "find double points and their separations")):
        _add_common(sub.add_parser(name, help=text))
    g = sub.add_parser("grid", help="grid diagram pipeline")
    g.add_argument("action", choices=("validate", "to-radial", "product-lift-check", "build-immersion"))
    g.add_argument("--arcs", type=_bits, help="arc choice bits for to-radial, e.g. 0,1,0")
    _add_common(g)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    tol = Tolerances(**{f.name: getattr(ns, f"tol_{f.name}") for f in dataclasses.fields(Tolerances)})
    return RunConfig(
        command=ns.command, model=ns.model, n=ns.n, eps=ns.eps, perturb=ns.perturb, eta=ns.eta,
        special=ns.special, phase=ns.phase, samples=ns.samples, grid=ns.grid, seed=ns.seed, fmt=ns.fmt,
        out=ns.out, input=ns.input, fixture=ns.fixture, action=getattr(ns, "action", None),
        arcs=getattr(ns, "arcs", None), timing=ns.timing, tol=tol,
    )


COMMANDS = {"verify": cmd_verify, "lift": cmd_lift, "doublepoints": cmd_doublepoints, "grid": cmd_grid}


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        cfg.validate()
        return COMMANDS[cfg.command](cfg)
    except (SchemaError, InputError, GridError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (ImmersionError, SmoothingOverlapError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
