"""Chart-by-chart lifting integral, condition checks and the Legendrian lift."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .config import DEFAULT, Tolerances, circular_distance, signed_angle, wrap_angle
from .immersion import TWO_PI, ParametricImmersion, PathSpec
from .quadrature import adaptive_simpson


class Condition1Error(RuntimeError):
    """An H_1 generator has nonzero holonomy, so no global lift exists."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class PathTreeError(RuntimeError):
    """Two parameter paths to the same point disagree on the lift."""


@dataclass(frozen=True)
class ChartSegmentation:
    breakpoints: tuple
    charts: tuple

    @property
    def m(self) -> int:
        return len(self.charts)


@dataclass(frozen=True)
class LiftState:
    """Unreduced fiber angle ``t`` in hemispherical chart ``chart``."""

    t: float
    chart: int


def _max_chart(h: np.ndarray) -> int:
    return int(np.argmax(np.abs(h))) + 1


def _bisect_drop(f, path, j, lo, hi, margin, iters=60):
    """Last s in [lo, hi] where |h_j| is still at least ``margin``."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if abs(f(path.at(mid))[0, j - 1]) >= margin:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13:
            break
    return lo


def segment_path(
    f: ParametricImmersion, path: PathSpec, tol: Tolerances = DEFAULT, start_chart: Optional[int] = None
) -> ChartSegmentation:
    """Greedy hysteresis segmentation of ``f(path)`` into hemispherical charts.

    A chart is kept until its homogeneous coordinate drops below the margin;
    the switch point is located by bisection and the new chart is the
    largest coordinate there.
    """
    margin = tol.margin_for(f.n)
    s = np.linspace(0.0, 1.0, path.samples)
    mods = np.abs(f(path.at(s)))
    j = start_chart if start_chart is not None else _max_chart(mods[0])
    if mods[0, j - 1] < margin:
        j = _max_chart(mods[0])
    breaks, charts = [0.0], [j]
    for i in range(1, s.size):
        if mods[i, j - 1] >= margin:
            continue
        b = _bisect_drop(f, path, j, max(s[i - 1], breaks[-1]), s[i], margin)
        j = _max_chart(f(path.at(b))[0])
        breaks.append(b)
        charts.append(j)
    breaks.append(1.0)
    return ChartSegmentation(tuple(breaks), tuple(charts))


def tau_rate(f: ParametricImmersion, path: PathSpec, j: int) -> Callable[[np.ndarray], np.ndarray]:
    """Integrand ``s -> tau_j((f o path)'(s))`` in chart-j coordinates."""

    def rate(s):
        x = path.at(s)
        v = path.speed(s)
        h = f(x)
        dh = f.directional(x, v)
        hj = h[:, j - 1]
        u = hj / np.abs(hj)
        drift = np.imag(dh[:, j - 1] / hj)
        z = h * np.conj(u)[:, None]
        dz = np.conj(u)[:, None] * (dh - 1j * h * drift[:, None])
        z = np.delete(z, j - 1, axis=1)
        dz = np.delete(dz, j - 1, axis=1)
        # tau_j = -sum (x dy - y dx) = -Im(conj(z) dz)
        return -np.sum(np.imag(np.conj(z) * dz), axis=1)

    return rate


def transition_angle(h: np.ndarray, j: int, k: int) -> float:
    """Fiber shift from chart j to chart k at representative h: arg z_k."""
    return float(np.angle(h[k - 1] * np.conj(h[j - 1])))


def to_chart(state: LiftState, h: np.ndarray, k: int) -> LiftState:
    if k == state.chart:
        return state
    return LiftState(state.t + transition_angle(h, state.chart, k), k)


def kink_crossings(f: ParametricImmersion, path: PathSpec, iters: int = 60) -> list[float]:
    """Path fractions where ``path`` passes a kink of ``f``."""
    if not f.kinks:
        return []
    s = np.linspace(0.0, 1.0, 4 * path.samples)
    x = path.at(s)
    out = []
    for axis, knots in f.kinks.items():
        knots = np.asarray(knots, dtype=float)
        count = lambda v: np.floor((np.asarray(v)[..., None] - knots) / TWO_PI).sum(axis=-1)
        c = count(x[:, axis])
        for i in np.nonzero(np.diff(c))[0]:
            lo, hi = s[i], s[i + 1]
            c_lo = c[i]
            for _ in range(iters):
                mid = 0.5 * (lo + hi)
                if count(path.at(mid)[0, axis]) == c_lo:
                    lo = mid
                else:
                    hi = mid
            out.append(0.5 * (lo + hi))
    return sorted(out)


def _integrate_split(rate, lo, hi, cuts, tol: Tolerances) -> float:
    edges = [lo] + [c for c in cuts if lo < c < hi] + [hi]
    return sum(adaptive_simpson(rate, a, b, tol.quad_tol, tol.max_depth) for a, b in zip(edges[:-1], edges[1:]))


def continue_lift(
    f: ParametricImmersion, path: PathSpec, state: LiftState, tol: Tolerances = DEFAULT
) -> LiftState:
    """Carry a lift state along ``path``; the result is in the final chart."""
    h0 = f(path.at(0.0))[0]
    seg = segment_path(f, path, tol, start_chart=state.chart)
    cuts = kink_crossings(f, path)
    t = to_chart(state, h0, seg.charts[0]).t
    for k, j in enumerate(seg.charts):
        lo, hi = seg.breakpoints[k], seg.breakpoints[k + 1]
        t += _integrate_split(tau_rate(f, path, j), lo, hi, cuts, tol)
        if k + 1 < seg.m:
            t += transition_angle(f(path.at(hi))[0], j, seg.charts[k + 1])
    return LiftState(t, seg.charts[-1])


def continue_pieces(f, pieces, state, tol: Tolerances = DEFAULT) -> LiftState:
    for piece in pieces:
        state = continue_lift(f, piece, state, tol)
    return state


def lifting_integral(
    f: ParametricImmersion, path, a: float = 0.0, tol: Tolerances = DEFAULT, chart: Optional[int] = None
) -> float:
    """Lifting integral of ``path`` (a PathSpec or list of them) with initial
    angle ``a``, reduced mod 2 pi in the final chart."""
    pieces = [path] if isinstance(path, PathSpec) else list(path)
    h0 = f(pieces[0].at(0.0))[0]
    start = LiftState(a, chart or _max_chart(h0))
    return float(wrap_angle(continue_pieces(f, pieces, start, tol).t))


def loop_holonomy(f: ParametricImmersion, pieces, tol: Tolerances = DEFAULT) -> float:
    """Unreduced lifting integral around a closed path, read in the start chart."""
    pieces = [pieces] if isinstance(pieces, PathSpec) else list(pieces)
    h0 = f(pieces[0].at(0.0))[0]
    start = LiftState(0.0, _max_chart(h0))
    end = continue_pieces(f, pieces, start, tol)
    h1 = f(pieces[-1].at(1.0))[0]
    return to_chart(end, h1, start.chart).t


@dataclass
class GeneratorReport:
    index: int
    holonomy: float
    raw: float
    winding: int
    passed: bool


def check_condition1(f: ParametricImmersion, tol: Tolerances = DEFAULT) -> list[GeneratorReport]:
    """Holonomy of every H_1 generator, reduced to (-pi, pi]."""
    out = []
    for i, gen in enumerate(f.h1_generators):
        raw = loop_holonomy(f, gen, tol)
        hol = signed_angle(raw)
        out.append(GeneratorReport(i, hol, raw, int(round(raw / TWO_PI)), abs(hol) <= tol.hol_tol))
    return out


def separation(f: ParametricImmersion, p, q, tol: Tolerances = DEFAULT) -> float:
    """Lifting integral from p to q read back in the chart at p, mod 2 pi.

    This is the fiber angle taking the lift at p to the lift at q.
    """
    path = canonical_pair_path(f, p, q)
    h0 = f(np.asarray(p, dtype=float))
    start = LiftState(0.0, _max_chart(h0))
    end = continue_pieces(f, path, start, tol)
    return float(wrap_angle(to_chart(end, f(np.asarray(q, dtype=float)), start.chart).t))


def canonical_pair_path(f: ParametricImmersion, p, q) -> list[PathSpec]:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if f.domain.kind == "torus":
        return [PathSpec.segment(p, q)]
    return sphere_path(p, q)


def sphere_path(p, q, samples: int = 129) -> list[PathSpec]:
    """Great-circle arc, split through an orthogonal point when p, q are
    (nearly) antipodal."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.allclose(p, q, atol=1e-15):
        return [PathSpec.segment(p, q, 2)]
    if p @ q < -0.5:
        w = np.zeros_like(p)
        w[int(np.argmin(np.abs(p)))] = 1.0
        w -= (w @ p) * p
        w /= np.linalg.norm(w)
        return [PathSpec.great_arc(p, w, samples), PathSpec.great_arc(w, q, samples)]
    return [PathSpec.great_arc(p, q, samples)]


def axis_path(base, x, order=None, samples: int = 129) -> list[PathSpec]:
    """Torus path from ``base`` to ``x`` changing one coordinate at a time."""
    base = np.asarray(base, dtype=float)
    x = np.asarray(x, dtype=float)
    order = range(base.size) if order is None else order
    pts = [base.copy()]
    cur = base.copy()
    for i in order:
        cur = cur.copy()
        cur[i] = x[i]
        pts.append(cur)
    return [PathSpec.segment(a, b, samples) for a, b in zip(pts[:-1], pts[1:]) if not np.array_equal(a, b)]


@dataclass
class LiftedMap:
    """Legendrian lift of an immersion into S^{2n-1}.

    The lift at x is ``e^{i t} h(x) conj(u_j)`` where ``(t, j)`` is the lift
    state reached along the canonical path from the basepoint and
    ``u_j = h_j/|h_j|``. When ``t_func`` is supplied it replaces the
    integral (closed-form lifts), with ``t_chart`` naming its chart.
    """

    f: ParametricImmersion
    basepoint: np.ndarray
    a: float
    tol: Tolerances = DEFAULT
    t_func: Optional[Callable[[np.ndarray], float]] = None
    t_chart: Optional[int] = None
    start_chart: int = field(init=False)

    def __post_init__(self):
        self.basepoint = np.asarray(self.basepoint, dtype=float)
        h = self.f(self.basepoint)
        self.start_chart = self.t_chart or _max_chart(h)

    @property
    def n(self) -> int:
        return self.f.n

    def base_state(self) -> LiftState:
        return LiftState(self.a, self.start_chart)

    def path_to(self, x, order=None) -> list[PathSpec]:
        if self.f.domain.kind == "torus":
            return axis_path(self.basepoint, x, order)
        return sphere_path(self.basepoint, x)

    def state_at(self, x) -> LiftState:
        x = np.asarray(x, dtype=float)
        if self.t_func is not None:
            return LiftState(float(self.t_func(x)), self.t_chart)
        return continue_pieces(self.f, self.path_to(x), self.base_state(), self.tol)

    def step(self, x_from, state: LiftState, x_to) -> LiftState:
        """Local continuation of a known state along a short straight path."""
        x_to = np.asarray(x_to, dtype=float)
        if self.t_func is not None:
            return LiftState(float(self.t_func(x_to)), self.t_chart)
        if self.f.domain.kind == "torus":
            piece = [PathSpec.segment(x_from, x_to, 3)]
        else:
            piece = sphere_path(x_from, x_to, 3)
        return continue_pieces(self.f, piece, state, self.tol)

    def point(self, x, state: Optional[LiftState] = None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        state = self.state_at(x) if state is None else state
        h = self.f(x)
        hj = h[state.chart - 1]
        return np.exp(1j * state.t) * h * np.conj(hj) / abs(hj)

    def __call__(self, x) -> np.ndarray:
        return self.point(x)

    def t_of(self, x, state: Optional[LiftState] = None) -> float:
        """Unreduced t in the basepoint chart (or the reached chart if the
        basepoint chart misses x)."""
        x = np.asarray(x, dtype=float)
        state = self.state_at(x) if state is None else state
        h = self.f(x)
        if abs(h[self.start_chart - 1]) > self.tol.locate_tol:
            state = to_chart(state, h, self.start_chart)
        return state.t

    def check_path_independence(self, x) -> float:
        """Compare the canonical path with the reversed axis order."""
        x = np.asarray(x, dtype=float)
        if self.t_func is not None:
            return 0.0
        if self.f.domain.kind == "torus":
            other = self.path_to(x, order=list(reversed(range(x.size))))
        else:
            w = self.f.domain.retract(self.basepoint + 0.5 * np.roll(self.basepoint, 1) + 0.1)
            other = sphere_path(self.basepoint, w) + sphere_path(w, x)
        s1 = continue_pieces(self.f, self.path_to(x), self.base_state(), self.tol)
        s2 = continue_pieces(self.f, other, self.base_state(), self.tol)
        h = self.f(x)
        gap = circular_distance(wrap_angle(to_chart(s2, h, s1.chart).t), wrap_angle(s1.t))
        if gap > self.tol.hol_tol:
            raise PathTreeError(f"lift differs by {gap:.3e} between path orders at {x}")
        return gap

    def sample_grid(self, density: int):
        """Lift states on the domain grid.

        On the torus the canonical axis-ordered tree is walked incrementally,
        so each grid point costs one short segment. Returns
        ``(params, states)``.
        """
        params = self.f.domain.grid(density)
        if self.t_func is not None:
            return params, [self.state_at(x) for x in params]
        if self.f.domain.kind == "sphere":
            return params, [self.state_at(x) for x in params]
        d = self.f.domain.d
        step = TWO_PI / density
        shape = (density,) * d
        states: dict = {}
        origin = self.basepoint
        for idx in np.ndindex(*shape):
            x = origin + np.array(idx) * step
            if not any(idx):
                states[idx] = self.base_state()
                continue
            # parent: decrement the last nonzero axis (axis-ordered tree)
            last = max(i for i, v in enumerate(idx) if v)
            parent = list(idx)
            parent[last] -= 1
            parent = tuple(parent)
            xp = origin + np.array(parent) * step
            states[idx] = continue_lift(self.f, PathSpec.segment(xp, x, 9), states[parent], self.tol)
        ordered = [states[idx] for idx in np.ndindex(*shape)]
        return params + origin, ordered


def default_basepoint(f: ParametricImmersion) -> np.ndarray:
    if f.domain.kind == "torus":
        return np.zeros(f.domain.d)
    e = np.zeros(f.domain.d + 1)
    e[-1] = 1.0
    return e


def build_lift(
    f: ParametricImmersion,
    basepoint=None,
    a: Optional[float] = None,
    tol: Tolerances = DEFAULT,
    check: bool = True,
) -> LiftedMap:
    """Legendrian lift via the lifting integral from ``basepoint``.

    ``a`` defaults to the argument of the basepoint's largest homogeneous
    coordinate, so the lift at the basepoint is the normalized
    representative returned by ``f``.
    """
    basepoint = default_basepoint(f) if basepoint is None else np.asarray(basepoint, dtype=float)
    if check:
        report = check_condition1(f, tol)
        bad = [r for r in report if not r.passed]
        if bad:
            raise Condition1Error(
                f"generator {bad[0].index} has holonomy {bad[0].holonomy:.6g}", report
            )
    h = f(basepoint)
    if a is None:
        a = float(np.angle(h[_max_chart(h) - 1]))
    return LiftedMap(f, basepoint, a, tol)


@dataclass
class LiftResult:
    lift: LiftedMap
    t0: float
    params: np.ndarray
    t_values: np.ndarray
    condition1: list
    condition2: list
    certified: bool


def lift_report(f: ParametricImmersion, density: int = 32, dps=None, tol: Tolerances = DEFAULT, **kw) -> LiftResult:
    """Build the lift, sample t on a grid and collect both condition reports."""
    from .doublepoints import check_condition2

    c1 = check_condition1(f, tol)
    lift = build_lift(f, tol=tol, check=False, **kw)
    params, states = lift.sample_grid(density)
    ts = np.array([lift.t_of(x, s) for x, s in zip(params, states)])
    c2 = check_condition2(f, dps or [], tol) if dps is not None else []
    certified = all(r.passed for r in c1) and all(r.passed for r in c2)
    return LiftResult(lift, lift.a, params, ts, c1, c2, certified)
