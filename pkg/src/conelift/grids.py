"""Lagrangian grid diagrams, radial grids, smoothing, the product torus and
hypercube marking validation.

Conventions (fixed here, used everywhere):

* A grid of size n has rows Y = 0..n-1 and columns X = 0..n-1. Each row
  holds one X-marking (column ``xs[Y]``) and one O-marking (``os[Y]``).
* The loop runs horizontally from X to O inside a row, then vertically from
  that O to the X in the same column. Traversal starts at the X of row 0.
* In the radial grid, row Y sits on the circle of radius ``sqrt((Y+1)/(3n))``
  and column X on the ray at angle ``2 pi X / n``; counterclockwise is +X.
* Areas are measured in cells: a horizontal move of m columns in row Y
  contributes ``m (Y+1)``. One cell equals ``2 pi / (3 n^2)`` of t in the
  counterclockwise-positive convention.
* The crossing value is ``A(vertical strand) - A(horizontal strand)`` where
  ``A`` is the area accumulated from the start of the loop.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import DEFAULT, Tolerances
from .immersion import TWO_PI, ParameterDomain, ParametricImmersion, PathSpec


class GridError(ValueError):
    """Structurally invalid grid data."""


class SchemaError(ValueError):
    """Grid JSON that does not match the expected schema."""

    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class SmoothingOverlapError(ValueError):
    """Fillet radius larger than half of the shortest segment."""


def cell_value(n: int) -> float:
    """t-value of one radial cell, ``2 pi / (3 n^2)``."""
    return TWO_PI / (3.0 * n * n)


# ----------------------------------------------------------------------------
# planar diagrams
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class GridDiagram:
    xs: tuple
    os: tuple

    def __post_init__(self):
        xs = tuple(int(v) for v in self.xs)
        os_ = tuple(int(v) for v in self.os)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "os", os_)
        n = len(xs)
        if n < 1 or len(os_) != n:
            raise GridError("X and O marking lists must have the same nonzero length")
        if sorted(xs) != list(range(n)) or sorted(os_) != list(range(n)):
            raise GridError("each column must hold exactly one X and one O marking")
        if n > 1 and any(a == b for a, b in zip(xs, os_)):
            raise GridError("an X and an O marking share a cell")

    @property
    def n(self) -> int:
        return len(self.xs)

    @staticmethod
    def from_markings(n: int, x_cells, o_cells) -> "GridDiagram":
        """Build from (row, col) marking lists."""
        xs = [None] * n
        os_ = [None] * n
        for r, c in x_cells:
            if xs[r] is not None:
                raise GridError(f"row {r} has two X markings")
            xs[r] = c
        for r, c in o_cells:
            if os_[r] is not None:
                raise GridError(f"row {r} has two O markings")
            os_[r] = c
        if None in xs or None in os_:
            raise GridError("every row needs one X and one O marking")
        return GridDiagram(tuple(xs), tuple(os_))

    def x_row_of_column(self, c: int) -> int:
        return self.xs.index(c)

    def o_row_of_column(self, c: int) -> int:
        return self.os.index(c)

    def row_order(self) -> list:
        """Rows in traversal order from row 0; raises if the markings give
        more than one component."""
        order = [0]
        r = 0
        while True:
            r = self.x_row_of_column(self.os[r])
            if r == 0:
                break
            order.append(r)
        if len(order) != self.n:
            raise GridError(f"markings define a link with several components ({len(order)} of {self.n} rows in the first)")
        return order

    def is_knot(self) -> bool:
        try:
            self.row_order()
            return True
        except GridError:
            return False

    def polygon(self) -> np.ndarray:
        """Marking positions (cell centres) in traversal order: X, O, X, O, ..."""
        pts = []
        for r in self.row_order():
            pts.append((self.xs[r] + 0.5, r + 0.5))
            pts.append((self.os[r] + 0.5, r + 0.5))
        return np.array(pts)


@dataclass(frozen=True)
class Crossing:
    row: int
    col: int
    area: int  # in cells, vertical strand minus horizontal strand
    n: int

    @property
    def delta_t(self) -> float:
        return self.area * cell_value(self.n)

    def as_dict(self) -> dict:
        return {"row": self.row, "col": self.col, "cells": self.area, "delta_t": self.delta_t}


def _arcs(g: GridDiagram, choices) -> list:
    """Signed column count of the chosen X -> O move in every row."""
    out = []
    for r in range(g.n):
        m = g.os[r] - g.xs[r]
        if choices is not None and choices[r]:
            m = m - g.n if m > 0 else m + g.n
        out.append(m)
    return out


def _loop_data(g: GridDiagram, choices=None):
    """Traversal order, per-row moves, and the area accumulated at the start
    of each row's horizontal move and along each column's vertical move."""
    order = g.row_order()
    moves = _arcs(g, choices)
    area = 0
    h_start, v_area = {}, {}
    for r in order:
        h_start[r] = area
        area += moves[r] * (r + 1)
        v_area[g.os[r]] = area
    return order, moves, h_start, v_area, area


def crossings(g: GridDiagram, choices=None) -> list:
    """Every horizontal/vertical crossing with its enclosed area in cells."""
    order, moves, h_start, v_area, _ = _loop_data(g, choices)
    out = []
    n = g.n
    for r in range(n):
        m = moves[r]
        step = 1 if m > 0 else -1
        for k in range(1, abs(m)):
            c = (g.xs[r] + step * k) % n
            lo, hi = sorted((g.o_row_of_column(c), g.x_row_of_column(c)))
            if lo < r < hi:
                out.append(Crossing(r, c, v_area[c] - (h_start[r] + step * k * (r + 1)), n))
    out.sort(key=lambda c: (c.row, c.col))
    return out


@dataclass
class LagrangianGridReport:
    grid: GridDiagram
    signed_area_total: int
    crossing_list: list
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def crossing_areas(self) -> list:
        return [(i, c.delta_t) for i, c in enumerate(self.crossing_list)]

    def as_dict(self) -> dict:
        return {
            "size": self.grid.n,
            "signed_area_cells": self.signed_area_total,
            "signed_area": self.signed_area_total * cell_value(self.grid.n),
            "crossings": [c.as_dict() for c in self.crossing_list],
            "violations": self.violations,
            "pass": self.passed,
        }


def validate_lagrangian_grid(g: GridDiagram, choices=None) -> LagrangianGridReport:
    """Total signed area must vanish and every crossing must enclose a
    nonzero area."""
    try:
        _, _, _, _, total = _loop_data(g, choices)
    except GridError as exc:
        return LagrangianGridReport(g, 0, [], [{"condition": "knot", "detail": str(exc)}])
    cr = crossings(g, choices)
    violations = []
    if total != 0:
        violations.append({"condition": "area", "detail": f"total signed area {total} cells"})
    for c in cr:
        if c.area == 0:
            violations.append({"condition": "crossing", "detail": f"crossing at row {c.row}, col {c.col} encloses 0"})
    return LagrangianGridReport(g, total, cr, violations)


def validate_radial_grid(r: "RadialGridDiagram") -> LagrangianGridReport:
    """Radial form of the two conditions: the total area and every crossing
    are compared with the full-turn value ``3 n^2`` cells instead of 0, since
    t is only defined mod 2 pi."""
    g = r.base
    try:
        _, _, _, _, total = _loop_data(g, r.arc_choices)
    except GridError as exc:
        return LagrangianGridReport(g, 0, [], [{"condition": "knot", "detail": str(exc)}])
    full = 3 * g.n * g.n
    cr = crossings(g, r.arc_choices)
    violations = []
    if total % full:
        violations.append({"condition": "area", "detail": f"total {total} cells is not a multiple of {full}"})
    for c in cr:
        if c.area % full == 0:
            violations.append({"condition": "crossing", "detail": f"crossing at row {c.row}, col {c.col} encloses {c.area} = 0 mod {full}"})
    return LagrangianGridReport(g, total, cr, violations)


def shoelace_area(points: np.ndarray) -> float:
    """``integral of y dx`` around a closed polygon (minus the usual
    counterclockwise area)."""
    x, y = points[:, 0], points[:, 1]
    return float(-0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


# ----------------------------------------------------------------------------
# radial diagrams
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialGridDiagram:
    base: GridDiagram
    arc_choices: tuple = ()

    def __post_init__(self):
        ch = tuple(int(bool(v)) for v in self.arc_choices) or (0,) * self.base.n
        if len(ch) != self.base.n:
            raise GridError("one arc choice per row is required")
        object.__setattr__(self, "arc_choices", ch)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def radii(self) -> np.ndarray:
        return np.sqrt(np.arange(1, self.n + 1) / (3.0 * self.n))

    @property
    def angles(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n) / self.n

    def moves(self) -> list:
        return _arcs(self.base, self.arc_choices)

    def arc_angles(self) -> np.ndarray:
        """Signed subtended angle of the chosen arc in each row."""
        return TWO_PI * np.array(self.moves(), dtype=float) / self.n

    def marking_point(self, row: int, col: int) -> complex:
        return complex(self.radii[row] * np.exp(1j * self.angles[col]))

    def cell_areas(self) -> np.ndarray:
        r2 = np.concatenate([[0.0], self.radii ** 2])
        band = math.pi * np.diff(r2)
        return np.repeat(band[:, None] / self.n, self.n, axis=1)

    def crossings(self) -> list:
        return crossings(self.base, self.arc_choices)


def to_radial(g: GridDiagram, arc_choices=None) -> RadialGridDiagram:
    """Place the markings on circles of radius sqrt(k/(3n)) and rays at
    angle 2 pi k/n; ``arc_choices`` picks the long way round per row."""
    return RadialGridDiagram(g, tuple(arc_choices) if arc_choices is not None else ())


def arc_delta_t(n: int, row: int, angle: float) -> float:
    """Counterclockwise-positive t change along an arc in a radial row."""
    return angle * (row + 1) / (3.0 * n)


@dataclass
class Holonomy:
    net: float
    cells: int
    winding: Optional[int]

    @property
    def liftable(self) -> bool:
        return self.winding is not None


def radial_holonomy(r: RadialGridDiagram) -> Holonomy:
    """Sum of ``a_i r_i^2`` over the chosen arcs, and the winding number
    when that sum is an integer multiple of 2 pi."""
    net = float(np.sum(r.arc_angles() * r.radii ** 2))
    cells = sum(m * (row + 1) for row, m in enumerate(r.moves()))
    k = net / TWO_PI
    winding = int(round(k)) if abs(k - round(k)) < 1e-12 else None
    return Holonomy(net, cells, winding)


@dataclass
class ProductLiftResult:
    passed: bool
    witness: Optional[tuple] = None


def product_lift_condition(c1: list, c2: list, modular: bool = False, atol: float = 1e-12) -> ProductLiftResult:
    """All crossing magnitudes of one diagram differ from all of the other's.

    ``c1``/``c2`` hold Crossing objects or plain t-values. With ``modular``
    the comparison is made mod 2 pi in both signs, which is what matters
    once the loops wind around the fiber.
    """
    v1 = [c.delta_t if isinstance(c, Crossing) else float(c) for c in c1]
    v2 = [c.delta_t if isinstance(c, Crossing) else float(c) for c in c2]
    for a in v1:
        for b in v2:
            if modular:
                bad = any(abs(math.remainder(a + s * b, TWO_PI)) < atol for s in (1, -1))
            else:
                bad = abs(abs(a) - abs(b)) < atol
            if bad:
                return ProductLiftResult(False, (a, b))
    return ProductLiftResult(True)


# ----------------------------------------------------------------------------
# smoothed loops and the product immersion
# ----------------------------------------------------------------------------

@dataclass
class _Piece:
    kind: str  # "line" or "arc"
    length: float
    start: np.ndarray = None
    direction: np.ndarray = None
    center: np.ndarray = None
    radius: float = 0.0
    phi0: float = 0.0
    sweep: float = 0.0

    def point(self, u):
        """Position and unit tangent at arc length u in [0, length]."""
        if self.kind == "line":
            return self.start + u[:, None] * self.direction, np.broadcast_to(self.direction, (u.size, 2))
        ang = self.phi0 + np.sign(self.sweep) * u / self.radius
        pos = self.center + self.radius * np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        tan = np.sign(self.sweep) * np.stack([-np.sin(ang), np.cos(ang)], axis=-1)
        return pos, tan

    def area(self, u) -> np.ndarray:
        """``integral of (Y+1) dX`` from the start of the piece to arc length u."""
        u = np.asarray(u, dtype=float)
        if self.kind == "line":
            return (self.start[1] + 1.0) * self.direction[0] * u
        s = np.sign(self.sweep)
        phi = self.phi0 + s * u / self.radius
        c, rho = self.center[1] + 1.0, self.radius
        # x = cx + rho cos(phi), y = cy + rho sin(phi)
        # integral (c + rho sin phi)(-rho sin phi) dphi
        f = lambda p: c * rho * np.cos(p) - rho * rho * (p / 2.0 - np.sin(2.0 * p) / 4.0)
        return f(phi) - f(self.phi0)


@dataclass
class SmoothLoop:
    """Corner-rounded planar grid loop in (X, Y) cell coordinates, traversed
    at constant speed for theta in [0, 2 pi)."""

    n: int
    vertices: np.ndarray
    rho: float
    pieces: list
    offsets: np.ndarray
    area_offsets: np.ndarray
    shift: float

    @property
    def length(self) -> float:
        return float(self.offsets[-1])

    def _locate(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        s = np.mod(theta, TWO_PI) / TWO_PI * self.length
        idx = np.clip(np.searchsorted(self.offsets, s, side="right") - 1, 0, len(self.pieces) - 1)
        return s, idx, np.floor_divide(theta, TWO_PI)

    def planar(self, theta):
        """``(X, Y)`` and ``d(X, Y)/d theta``; X advances by the net column
        drift on every full turn so the angle stays continuous."""
        s, idx, turns = self._locate(theta)
        pos = np.empty((s.size, 2))
        tan = np.empty((s.size, 2))
        for k in np.unique(idx):
            m = idx == k
            p, t = self.pieces[k].point(s[m] - self.offsets[k])
            pos[m], tan[m] = p, t
        pos[:, 0] += turns * self.drift
        return pos, tan * self.length / TWO_PI

    @property
    def drift(self) -> float:
        return float(self.vertices[-1, 0] - self.vertices[0, 0])

    def area(self, theta) -> np.ndarray:
        """Accumulated ``integral of (Y+1) dX`` from theta = 0."""
        s, idx, turns = self._locate(theta)
        out = np.empty(s.size)
        for k in np.unique(idx):
            m = idx == k
            out[m] = self.area_offsets[k] + self.pieces[k].area(s[m] - self.offsets[k])
        return out + turns * self.area_offsets[-1]

    @property
    def total_area(self) -> float:
        return float(self.area_offsets[-1])

    def complex_point(self, theta):
        """Radial image ``sqrt((Y+1)/(3n)) e^{2 pi i X/n}`` and its derivative."""
        pos, vel = self.planar(theta)
        X, Y = pos[:, 0], pos[:, 1]
        z = np.sqrt((Y + 1.0) / (3.0 * self.n)) * np.exp(1j * TWO_PI * X / self.n)
        dz = z * (vel[:, 1] / (2.0 * (Y + 1.0)) + 1j * TWO_PI * vel[:, 0] / self.n)
        return z, dz

    def knots(self) -> np.ndarray:
        """theta values where pieces meet."""
        return self.offsets[:-1] / self.length * TWO_PI

    def find_theta(self, col: int, row: float, vertical: bool) -> tuple:
        """(theta, Y) of the strand through column ``col`` (mod n) at height
        ``row``; a horizontal strand matches its row to within half a cell."""
        n = self.n
        for k, pc in enumerate(self.pieces):
            if pc.kind != "line":
                continue
            if (abs(pc.direction[0]) > 0.5) == vertical:
                continue
            a = pc.start
            b = pc.start + pc.length * pc.direction
            if vertical:
                off = (a[0] - col) % n
                if min(off, n - off) < 1e-9 and min(a[1], b[1]) < row < max(a[1], b[1]):
                    return float((self.offsets[k] + abs(row - a[1])) / self.length * TWO_PI), float(row)
            elif abs(a[1] - row) < 0.5:
                lo, hi = min(a[0], b[0]), max(a[0], b[0])
                for shift in range(math.floor((lo - col) / n), math.ceil((hi - col) / n) + 1):
                    x = col + shift * n
                    if lo < x < hi:
                        return float((self.offsets[k] + abs(x - a[0])) / self.length * TWO_PI), float(a[1])
        raise GridError(f"no {'vertical' if vertical else 'horizontal'} strand through ({col}, {row})")


def loop_vertices(r: RadialGridDiagram) -> np.ndarray:
    """PL loop corners in (X, Y) with X unwrapped along the traversal."""
    g = r.base
    moves = r.moves()
    pts = []
    x = float(g.xs[0])
    for row in g.row_order():
        pts.append((x, float(row)))
        x += moves[row]
        pts.append((x, float(row)))
    pts.append((pts[0][0] + (x - pts[0][0]), pts[0][1]))
    return np.array(pts)


def smooth_loop(r: RadialGridDiagram, radius: Optional[float] = None, tol: Tolerances = DEFAULT) -> SmoothLoop:
    """Round every corner with a quarter-circle fillet of radius ``radius``
    (default 0.1 x the shortest segment) and move the longest horizontal leg
    so the total signed area equals that of the PL loop."""
    verts = loop_vertices(r)  # closed: last = first shifted by the drift
    segs = np.diff(verts, axis=0)
    lengths = np.abs(segs).sum(axis=1)
    shortest = float(lengths.min())
    rho = 0.1 * shortest if radius is None else float(radius)
    if rho <= 0:
        raise SmoothingOverlapError("smoothing radius must be positive")
    if rho > 0.5 * shortest:
        raise SmoothingOverlapError(f"fillet radius {rho} exceeds half the shortest segment ({shortest})")

    dirs = segs / lengths[:, None]
    m = len(segs)
    # signed area change of each fillet
    turn = lambda k: float(np.sign(dirs[k - 1, 0] * dirs[k, 1] - dirs[k - 1, 1] * dirs[k, 0]))
    corner_loss = 0.0
    for k in range(m):
        corner_loss += _fillet_area_change(verts[k], dirs[k - 1], dirs[k], rho)
    # shift the longest horizontal leg to cancel the change
    horiz = [k for k in range(m) if abs(dirs[k, 0]) > 0.5]
    lead = max(horiz, key=lambda k: (lengths[k], -k))
    dy = -corner_loss / segs[lead, 0]
    verts = verts.copy()
    verts[lead, 1] += dy
    verts[lead + 1, 1] += dy
    if lead + 1 == m:
        verts[0, 1] += dy
    if lead == 0:
        verts[m, 1] += dy
    segs = np.diff(verts, axis=0)
    lengths = np.abs(segs).sum(axis=1)
    if rho > 0.5 * float(lengths.min()):
        raise SmoothingOverlapError("area compensation leaves a segment too short for the fillets")
    dirs = segs / lengths[:, None]

    pieces = []
    for k in range(m):
        start = verts[k] + rho * dirs[k]
        pieces.append(_Piece("line", lengths[k] - 2 * rho, start=start, direction=dirs[k].copy()))
        nxt = (k + 1) % m
        corner = verts[k + 1]
        d_in, d_out = dirs[k], dirs[nxt]
        cross = d_in[0] * d_out[1] - d_in[1] * d_out[0]
        center = corner - rho * d_in + rho * d_out
        rel = -rho * d_out
        phi0 = math.atan2(rel[1], rel[0])
        pieces.append(_Piece("arc", rho * math.pi / 2, center=center, radius=rho, phi0=phi0, sweep=math.copysign(math.pi / 2, cross)))
    offsets = np.concatenate([[0.0], np.cumsum([p.length for p in pieces])])
    area_offsets = np.concatenate([[0.0], np.cumsum([float(p.area(p.length)) for p in pieces])])
    del turn
    return SmoothLoop(r.n, verts, rho, pieces, offsets, area_offsets, dy)


def _fillet_area_change(corner, d_in, d_out, rho) -> float:
    """``integral of (Y+1) dX`` along the fillet minus along the corner."""
    p1 = corner - rho * d_in
    cross = d_in[0] * d_out[1] - d_in[1] * d_out[0]
    center = corner - rho * d_in + rho * d_out
    rel = -rho * d_out
    arc = _Piece("arc", rho * math.pi / 2, center=center, radius=rho, phi0=math.atan2(rel[1], rel[0]),
                 sweep=math.copysign(math.pi / 2, cross))
    sharp = (p1[1] + 1.0) * (corner[0] - p1[0]) + (corner[1] + 1.0) * rho * d_out[0]
    return float(arc.area(arc.length)) - sharp


@dataclass
class ProductTorus:
    loops: tuple
    immersion: ParametricImmersion

    def t_closed_form(self, theta) -> float:
        """Lift angle from the two area functions (t = -cells * 2 pi/(3 n^2))."""
        theta = np.asarray(theta, dtype=float)
        a, b = self.loops
        return float(-(a.area(theta[0])[0] * cell_value(a.n) + b.area(theta[1])[0] * cell_value(b.n)))


def build_product_immersion(
    r1: RadialGridDiagram, r2: RadialGridDiagram, smoothing_radius: Optional[float] = None, tol: Tolerances = DEFAULT
) -> ProductTorus:
    """``(theta1, theta2) -> (gamma1(theta1), gamma2(theta2))`` in chart 3 of
    CP^2, with both loops corner-rounded."""
    l1 = smooth_loop(r1, smoothing_radius, tol)
    l2 = smooth_loop(r2, smoothing_radius, tol)

    def func(x):
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-1]
        flat = x.reshape(-1, 2)
        z1, _ = l1.complex_point(flat[:, 0])
        z2, _ = l2.complex_point(flat[:, 1])
        last = np.sqrt(1.0 - np.abs(z1) ** 2 - np.abs(z2) ** 2)
        return np.stack([z1, z2, last + 0j], axis=-1).reshape(shape + (3,))

    def jac(x):
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-1]
        flat = x.reshape(-1, 2)
        z1, d1 = l1.complex_point(flat[:, 0])
        z2, d2 = l2.complex_point(flat[:, 1])
        last = np.sqrt(1.0 - np.abs(z1) ** 2 - np.abs(z2) ** 2)
        dl1 = -np.real(np.conj(z1) * d1) / last
        dl2 = -np.real(np.conj(z2) * d2) / last
        zero = np.zeros_like(z1)
        out = np.stack(
            [np.stack([d1, zero], -1), np.stack([zero, d2], -1), np.stack([dl1 + 0j, dl2 + 0j], -1)], axis=-2
        )
        return out.reshape(shape + (3, 2))

    gens = []
    for axis, loop in enumerate((l1, l2)):
        cuts = np.concatenate([loop.knots(), [TWO_PI]])
        pieces = []
        for a, b in zip(cuts[:-1], cuts[1:]):
            p = np.zeros(2)
            q = np.zeros(2)
            p[axis], q[axis] = a, b
            pieces.append(PathSpec.segment(p, q, 17))
        gens.append(pieces)
    f = ParametricImmersion(
        ParameterDomain("torus", 2), 3, func, jac, gens, "grid-product",
        {"rho": [l1.rho, l2.rho]},
        kinks={0: l1.knots(), 1: l2.knots()},
    )
    return ProductTorus((l1, l2), f)


def crossing_thetas(loop: SmoothLoop, c: Crossing) -> tuple:
    """(theta on the vertical strand, theta on the horizontal strand) at the
    actual intersection point of the smoothed loop."""
    th, y = loop.find_theta(c.col, c.row, False)
    tv, _ = loop.find_theta(c.col, y, True)
    return tv, th


def smoothed_crossing_cells(loop: SmoothLoop, c: Crossing) -> float:
    """Crossing value of the smoothed loop in cells (vertical minus horizontal)."""
    tv, th = crossing_thetas(loop, c)
    return float(loop.area(tv)[0] - loop.area(th)[0])


# ----------------------------------------------------------------------------
# hypercube diagrams
# ----------------------------------------------------------------------------

AXES = "wxyz"
LETTERS = "WXYZ"
#: vertex letter required for a 3-marking flat, keyed by the flat's free axes
FLAT_VERTEX = {frozenset("zw"): "W", frozenset("wx"): "X", frozenset("xy"): "Y", frozenset("yz"): "Z"}


@dataclass
class HypercubeDiagram:
    n: int
    markings: dict  # letter -> (n, 4) int array of (w, x, y, z) cells

    def __post_init__(self):
        self.markings = {k: np.asarray(v, dtype=int).reshape(-1, 4) for k, v in self.markings.items()}
        if set(self.markings) != set(LETTERS):
            raise GridError("hypercube needs W, X, Y and Z marking lists")

    def all_markings(self):
        for letter in LETTERS:
            for cell in self.markings[letter]:
                yield letter, tuple(int(v) for v in cell)

    def g_wy(self) -> GridDiagram:
        """W as X-markings, Y as O-markings; column w, row y."""
        return GridDiagram.from_markings(
            self.n,
            [(c[2], c[0]) for c in self.markings["W"]],
            [(c[2], c[0]) for c in self.markings["Y"]],
        )

    def g_zx(self) -> GridDiagram:
        """Z as X-markings, X as O-markings; column z, row x."""
        return GridDiagram.from_markings(
            self.n,
            [(c[1], c[3]) for c in self.markings["Z"]],
            [(c[1], c[3]) for c in self.markings["X"]],
        )


def hypercube_from_grids(g_wy: GridDiagram, g_zx: GridDiagram) -> HypercubeDiagram:
    """Markings whose projections are the two grids, walked in lockstep.

    With a_i the i-th X-marking of ``g_wy`` along its loop (alpha_i the O in
    that row) and b_i, beta_i likewise for ``g_zx``:
    ``W_i = (col a_i, row b_{i-1}, row a_i, col beta_{i-1})``,
    ``X_i = (col alpha_i, row b_{i-1}, row a_i, col beta_{i-1})``,
    ``Y_i = (col alpha_i, row b_i, row a_i, col b_i)``,
    ``Z_i = (col alpha_i, row b_i, row a_{i+1}, col b_i)``.
    """
    if g_wy.n != g_zx.n:
        raise GridError("component grids must have the same size")
    n = g_wy.n
    ra = g_wy.row_order()
    rb = g_zx.row_order()
    W, X, Y, Z = [], [], [], []
    for i in range(n):
        a, a_next = ra[i], ra[(i + 1) % n]
        b, b_prev = rb[i], rb[i - 1]
        col_a, col_alpha = g_wy.xs[a], g_wy.os[a]
        col_b, col_beta_prev = g_zx.xs[b], g_zx.os[b_prev]
        W.append((col_a, b_prev, a, col_beta_prev))
        X.append((col_alpha, b_prev, a, col_beta_prev))
        Y.append((col_alpha, b, a, col_b))
        Z.append((col_alpha, b, a_next, col_b))
    return HypercubeDiagram(n, {"W": W, "X": X, "Y": Y, "Z": Z})


@dataclass
class HypercubeReport:
    violations: list
    g_wy: Optional[LagrangianGridReport] = None
    g_zx: Optional[LagrangianGridReport] = None
    product: Optional[ProductLiftResult] = None

    @property
    def passed(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "pass": self.passed,
            "violations": self.violations,
            "g_wy": None if self.g_wy is None else self.g_wy.as_dict(),
            "g_zx": None if self.g_zx is None else self.g_zx.as_dict(),
            "product_lift": None if self.product is None else {"pass": self.product.passed, "witness": self.product.witness},
        }


def _right_angle_vertex(cells: list) -> Optional[int]:
    """Index of the corner if three cells form an axis-parallel right angle."""
    for v in range(3):
        others = [cells[k] for k in range(3) if k != v]
        diffs = [np.nonzero(np.array(o) != np.array(cells[v]))[0] for o in others]
        if all(len(d) == 1 for d in diffs) and diffs[0][0] != diffs[1][0]:
            return v
    return None


def validate_hypercube(h: HypercubeDiagram) -> HypercubeReport:
    """Check the four marking conditions on every stack and flat, then the
    component grids and the product lift condition."""
    n = h.n
    marks = list(h.all_markings())
    violations = []
    for letter, cell in marks:
        if any(not 0 <= v < n for v in cell):
            violations.append({"condition": 0, "where": f"{letter} at {cell}", "detail": "outside the hypercube"})
    if violations:
        return HypercubeReport(violations)
    for a in range(4):
        for k in range(n):
            stack = [(L, c) for L, c in marks if c[a] == k]
            where = f"stack {AXES[a]}={k}"
            for letter in LETTERS:
                count = sum(1 for L, _ in stack if L == letter)
                if count != 1:
                    violations.append({"condition": 1, "where": where, "detail": f"{count} {letter} markings"})
            full = 0
            for b in range(4):
                if b == a:
                    continue
                for m in range(n):
                    flat = [(L, c) for L, c in stack if c[b] == m]
                    if len(flat) != 3:
                        continue
                    full += 1
                    free = frozenset(AXES[i] for i in range(4) if i not in (a, b))
                    name = "".join(sorted(free, key=AXES.index))
                    fwhere = f"{name}-flat {AXES[a]}={k}, {AXES[b]}={m}"
                    v = _right_angle_vertex([c for _, c in flat])
                    if v is None:
                        violations.append({"condition": 3, "where": fwhere, "detail": "markings do not form a right angle"})
                        continue
                    need = FLAT_VERTEX.get(free)
                    got = flat[v][0]
                    if need is None:
                        violations.append({"condition": 4, "where": fwhere, "detail": f"{name}-flat may not hold 3 markings"})
                    elif got != need:
                        violations.append({"condition": 4, "where": fwhere, "detail": f"vertex is {got}, expected {need}"})
            if full != 2:
                violations.append({"condition": 2, "where": where, "detail": f"{full} flats with 3 markings"})
    # flats are shared by two stacks; report each violation once
    seen, unique = set(), []
    for v in violations:
        key = (v["condition"], v["where"], v["detail"])
        if key not in seen:
            seen.add(key)
            unique.append(v)
    violations = unique
    rep = HypercubeReport(violations)
    try:
        rep.g_wy = validate_lagrangian_grid(h.g_wy())
        rep.g_zx = validate_lagrangian_grid(h.g_zx())
    except GridError as exc:
        violations.append({"condition": "grid", "where": "component grids", "detail": str(exc)})
        return rep
    for name, gr in (("G_wy", rep.g_wy), ("G_zx", rep.g_zx)):
        for v in gr.violations:
            violations.append({"condition": "lagrangian", "where": name, "detail": v["detail"]})
    rep.product = product_lift_condition(rep.g_zx.crossing_list, rep.g_wy.crossing_list)
    if not rep.product.passed:
        violations.append({"condition": "product_lift", "where": "G_zx x G_wy", "detail": f"equal magnitudes {rep.product.witness}"})
    return rep


# ----------------------------------------------------------------------------
# JSON schema
# ----------------------------------------------------------------------------

def _expect(cond, message, path):
    if not cond:
        raise SchemaError(message, path)


def _cells(obj, path, width):
    _expect(isinstance(obj, list), "expected a list of cells", path)
    out = []
    for i, cell in enumerate(obj):
        p = f"{path}[{i}]"
        _expect(isinstance(cell, list) and len(cell) == width, f"expected {width} integers", p)
        _expect(all(isinstance(v, int) and not isinstance(v, bool) for v in cell), "entries must be integers", p)
        out.append(tuple(cell))
    return out


def grid_from_json(obj, path="$") -> RadialGridDiagram:
    """``{"size": n, "x": [[row, col], ...], "o": [...], "arc_choices": [...]}``."""
    _expect(isinstance(obj, dict), "expected an object", path)
    for key in ("size", "x", "o"):
        _expect(key in obj, f"missing field '{key}'", path)
    n = obj["size"]
    _expect(isinstance(n, int) and n >= 1, "size must be a positive integer", f"{path}.size")
    xs = _cells(obj["x"], f"{path}.x", 2)
    os_ = _cells(obj["o"], f"{path}.o", 2)
    for name, cells in (("x", xs), ("o", os_)):
        _expect(len(cells) == n, f"expected {n} markings", f"{path}.{name}")
        for i, (r, c) in enumerate(cells):
            _expect(0 <= r < n and 0 <= c < n, "cell outside the grid", f"{path}.{name}[{i}]")
    choices = obj.get("arc_choices", [0] * n)
    _expect(isinstance(choices, list) and len(choices) == n and all(v in (0, 1) for v in choices),
            f"arc_choices must be {n} bits", f"{path}.arc_choices")
    try:
        g = GridDiagram.from_markings(n, xs, os_)
    except GridError as exc:
        raise SchemaError(str(exc), path) from exc
    return RadialGridDiagram(g, tuple(choices))


def grid_to_json(r: RadialGridDiagram, **extra) -> dict:
    g = r.base
    out = {
        "size": g.n,
        "x": [[row, c] for row, c in enumerate(g.xs)],
        "o": [[row, c] for row, c in enumerate(g.os)],
        "arc_choices": list(r.arc_choices),
    }
    out.update(extra)
    return out


def hypercube_from_json(obj, path="$") -> HypercubeDiagram:
    """``{"size": n, "W": [[w, x, y, z], ...], "X": ..., "Y": ..., "Z": ...}``."""
    _expect(isinstance(obj, dict), "expected an object", path)
    _expect("size" in obj, "missing field 'size'", path)
    n = obj["size"]
    _expect(isinstance(n, int) and n >= 1, "size must be a positive integer", f"{path}.size")
    marks = {}
    for letter in LETTERS:
        _expect(letter in obj, f"missing field '{letter}'", path)
        marks[letter] = _cells(obj[letter], f"{path}.{letter}", 4)
    return HypercubeDiagram(n, marks)


def hypercube_to_json(h: HypercubeDiagram, **extra) -> dict:
    out = {"size": h.n}
    for letter in LETTERS:
        out[letter] = [[int(v) for v in c] for c in h.markings[letter]]
    out.update(extra)
    return out


def load_fixture(name: str) -> dict:
    """Bundled JSON fixture by file stem, e.g. ``radial_grid_pair``."""
    from importlib import resources

    text = resources.files("conelift").joinpath("fixtures", f"{name}.json").read_text()
    return json.loads(text)


def load_json(path) -> dict:
    """Read JSON, turning decode errors into SchemaError with line/column."""
    with open(path) as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON ({exc.msg}) at line {exc.lineno}, column {exc.colno}", str(path)) from exc
