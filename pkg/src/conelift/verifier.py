"""Finite-difference certification of Lagrangian, Legendrian, cone and
special Lagrangian conditions, plus randomized chart-atlas identities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .charts import (
    ChartPoint,
    FiberedChartPoint,
    alpha_eval,
    bundle_embed,
    chart_embed,
    chart_locate,
    complex_structure,
    exterior_derivative_fd,
    fubini_study_eval,
    omega0_eval,
    reeb_vector,
    tau_eval,
    to_complex,
    to_real,
    transition_point,
)
from .config import DEFAULT, Tolerances, circular_distance
from .lifting import LiftedMap


class DegenerateFrameError(ValueError):
    """The cone frame is (numerically) not of full rank."""


@dataclass
class VerificationReport:
    check_name: str
    max_residual: float
    threshold: float
    samples: int
    worst_point: tuple = ()
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.threshold)

    def as_dict(self) -> dict:
        out = {
            "check": self.check_name,
            "max_residual": float(self.max_residual),
            "threshold": float(self.threshold),
            "samples": int(self.samples),
            "pass": self.passed,
            "worst_point": [float(v) for v in self.worst_point],
        }
        out.update(self.details)
        return out


def _report(name, residuals, points, threshold, **details) -> VerificationReport:
    residuals = np.asarray(residuals, dtype=float)
    k = int(np.argmax(residuals))
    return VerificationReport(name, float(residuals[k]), threshold, residuals.size, tuple(points[k]), details)


# ----------------------------------------------------------------------------
# frames of maps into S^{2n-1}
# ----------------------------------------------------------------------------

def sphere_frame(lift, x, state=None, h: float = DEFAULT.fd_step):
    """Point and central-difference tangent images of a map into S^{2n-1}.

    For a :class:`LiftedMap` the neighbouring values continue the lift
    state along short segments, so no global path integral is repeated.
    Returns ``(L, dL)`` with ``dL`` of shape ``(d, n)``.
    """
    x = np.asarray(x, dtype=float)
    dom = lift.f.domain if isinstance(lift, LiftedMap) else lift.domain
    basis = dom.tangent_basis(x)
    if isinstance(lift, LiftedMap):
        state = lift.state_at(x) if state is None else state
        centre = lift.point(x, state)

        def at(y):
            return lift.point(y, lift.step(x, state, y))
    else:
        centre = lift.point(x)
        at = lift.point
    rows = []
    for b in basis:
        plus, minus = x + h * b, x - h * b
        if dom.kind == "sphere":
            plus, minus = dom.retract(plus), dom.retract(minus)
        rows.append((at(plus) - at(minus)) / (2 * h))
    return centre, np.array(rows)


def _samples(lift, samples: int):
    if isinstance(lift, LiftedMap):
        return lift.sample_grid(samples)
    pts = lift.domain.grid(samples)
    return pts, [None] * len(pts)


# ----------------------------------------------------------------------------
# the four certificates
# ----------------------------------------------------------------------------

def verify_lagrangian_projection(f, samples: int = 32, tol: Tolerances = DEFAULT) -> VerificationReport:
    """Max of |omega_FS| over coordinate 2-planes of the domain."""
    pts = f.domain.grid(samples)
    res = [f.lagrangian_residual(x) for x in pts]
    return _report("lagrangian_projection", res, pts, tol.lagr_tol)


def verify_legendrian_lift(lift, samples: int = 32, tol: Tolerances = DEFAULT) -> VerificationReport:
    """Max of |alpha(dL u)| over coordinate directions."""
    pts, states = _samples(lift, samples)
    res = []
    for x, st in zip(pts, states):
        L, dL = sphere_frame(lift, x, st, tol.fd_step)
        res.append(max(abs(alpha_eval(L, to_real(v))) for v in dL))
    return _report("legendrian_lift", res, pts, tol.legendrian_tol)


def verify_lagrangian_cone(
    lift, samples: int = 32, radii=(0.5, 1.0, 2.0), tol: Tolerances = DEFAULT
) -> VerificationReport:
    """Max of |omega_0| on the cone frame ``{L, r dL u_i}`` at each radius."""
    pts, states = _samples(lift, samples)
    res = []
    for x, st in zip(pts, states):
        L, dL = sphere_frame(lift, x, st, tol.fd_step)
        worst = 0.0
        for r in radii:
            frame = [to_real(L)] + [to_real(r * v) for v in dL]
            for a in range(len(frame)):
                for b in range(a + 1, len(frame)):
                    worst = max(worst, abs(omega0_eval(frame[a], frame[b])))
        res.append(worst)
    return _report("lagrangian_cone", res, pts, tol.cone_tol, radii=list(radii))


def cone_determinants(lift, samples: int = 32, tol: Tolerances = DEFAULT):
    """``det [L, dL u_1, ..., dL u_d]`` at every sample."""
    pts, states = _samples(lift, samples)
    dets = []
    for x, st in zip(pts, states):
        L, dL = sphere_frame(lift, x, st, tol.fd_step)
        m = np.column_stack([L] + list(dL))
        dets.append(np.linalg.det(m))
    dets = np.array(dets)
    if np.min(np.abs(dets)) < tol.rank_tol:
        k = int(np.argmin(np.abs(dets)))
        raise DegenerateFrameError(f"|det M| = {abs(dets[k]):.3e} at {pts[k]}")
    return pts, dets


def special_residual(dets, phase: float) -> np.ndarray:
    dets = np.asarray(dets, dtype=complex)
    return np.abs(np.imag(np.exp(-1j * phase) * dets)) / np.abs(dets)


def optimal_phase(dets) -> float:
    """Phase minimizing the largest special residual (period pi): coarse
    scan, then golden-section refinement."""
    dets = np.asarray(dets, dtype=complex)
    worst = lambda ph: float(np.max(special_residual(dets, ph)))
    grid = np.linspace(0.0, math.pi, 721)
    vals = [worst(g) for g in grid]
    k = int(np.argmin(vals))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    g = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - g * (b - a), a + g * (b - a)
    for _ in range(100):
        if worst(c) < worst(d):
            b = d
        else:
            a = c
        c, d = b - g * (b - a), a + g * (b - a)
        if b - a < 1e-14:
            break
    return float(0.5 * (a + b)) % math.pi


def verify_special_lagrangian(
    lift, samples: int = 32, phase: Optional[float] = 0.0, tol: Tolerances = DEFAULT
) -> VerificationReport:
    """``max |Im(e^{-i phase} det M)| / |det M|``; ``phase=None`` uses the
    single phase that is best for all samples."""
    pts, dets = cone_determinants(lift, samples, tol)
    ph = optimal_phase(dets) if phase is None else float(phase)
    res = special_residual(dets, ph)
    return _report("special_lagrangian", res, pts, tol.special_tol, phase=ph)


def trivial_special_criterion(eta) -> float:
    """``a2 a3 b1 + a1 a3 b2 + a1 a2 b3 - b1 b2 b3`` for ``eta_k = a_k + i b_k``."""
    eta = np.asarray(eta, dtype=complex)
    if eta.size != 3:
        raise ValueError("the criterion is stated for three entries")
    if np.any(eta == 0):
        raise ValueError("every entry of eta must be nonzero")
    a, b = eta.real, eta.imag
    return float(a[1] * a[2] * b[0] + a[0] * a[2] * b[1] + a[0] * a[1] * b[2] - b[0] * b[1] * b[2])


# ----------------------------------------------------------------------------
# chart atlas identities on random points
# ----------------------------------------------------------------------------

def random_chart_point(rng, n: int, j: int, radius: float = 0.95) -> ChartPoint:
    z = rng.normal(size=n - 1) + 1j * rng.normal(size=n - 1)
    z *= radius * rng.uniform() ** (1.0 / (2 * n - 2)) / np.linalg.norm(z)
    return ChartPoint(j, z)


def check_darboux(n: int = 3, count: int = 1000, seed: int = 0, h: float = DEFAULT.fd_step, threshold=1e-6):
    """Pullback of omega_FS through a hemispherical chart equals omega_0."""
    rng = np.random.default_rng(seed)
    res, pts = [], []
    for _ in range(count):
        j = int(rng.integers(1, n + 1))
        p = random_chart_point(rng, n, j, 0.9)
        u, v = rng.normal(size=2 * n - 2), rng.normal(size=2 * n - 2)
        emb = lambda w: chart_embed(ChartPoint(j, w))
        du = (emb(p.z + h * to_complex(u)) - emb(p.z - h * to_complex(u))) / (2 * h)
        dv = (emb(p.z + h * to_complex(v)) - emb(p.z - h * to_complex(v))) / (2 * h)
        res.append(abs(fubini_study_eval(chart_embed(p), du, dv) - omega0_eval(u, v)))
        pts.append(to_real(p.z))
    return _report("darboux", res, pts, threshold, n=n)


def check_trivialized_alpha(n: int = 3, count: int = 1000, seed: int = 1, h: float = DEFAULT.fd_step, threshold=1e-6):
    """``Psi_j^* alpha = (dt - tau_j)/2``."""
    rng = np.random.default_rng(seed)
    res, pts = [], []
    for _ in range(count):
        j = int(rng.integers(1, n + 1))
        p = random_chart_point(rng, n, j, 0.9)
        t = rng.uniform(0, 2 * math.pi)
        v = rng.normal(size=2 * n - 2)
        dt = rng.normal()
        emb = lambda s: bundle_embed(FiberedChartPoint(ChartPoint(j, p.z + s * to_complex(v)), t + s * dt))
        w = (emb(h) - emb(-h)) / (2 * h)
        up = alpha_eval(emb(0.0), to_real(w))
        down = 0.5 * (dt - tau_eval(j, p, v))
        res.append(abs(up - down))
        pts.append(to_real(p.z))
    return _report("trivialized_alpha", res, pts, threshold, n=n)


def check_transition_cocycle(n: int = 3, count: int = 1000, seed: int = 2, threshold=1e-6):
    """Transitions commute with ``bundle_embed`` and invert each other."""
    rng = np.random.default_rng(seed)
    res, pts = [], []
    for _ in range(count):
        j = int(rng.integers(1, n + 1))
        k = int(rng.integers(1, n + 1))
        p = FiberedChartPoint(random_chart_point(rng, n, j, 0.9), rng.uniform(0, 2 * math.pi))
        if k != j and abs(p.base.full(k)) < 1e-6:
            continue
        q = transition_point(p, k)
        back = transition_point(q, j)
        e1 = np.linalg.norm(bundle_embed(q) - bundle_embed(p))
        e2 = np.linalg.norm(back.base.z - p.base.z) + circular_distance(back.t, p.t)
        res.append(max(e1, e2))
        pts.append(to_real(p.base.z))
    return _report("transition_cocycle", res, pts, threshold, n=n)


def check_reeb(n: int = 3, count: int = 1000, seed: int = 3, h: float = DEFAULT.fd_step, threshold=1e-6):
    """``alpha(R) = 1`` and ``d alpha(R, v) = 0`` for v tangent to the sphere."""
    rng = np.random.default_rng(seed)
    res, pts = [], []
    alpha_real = lambda x, v: alpha_eval(to_complex(x), v)
    for _ in range(count):
        w = rng.normal(size=n) + 1j * rng.normal(size=n)
        w /= np.linalg.norm(w)
        R = reeb_vector(w)
        x = to_real(w)
        v = rng.normal(size=2 * n)
        v -= (v @ x) * x
        e1 = abs(alpha_eval(w, R) - 1.0)
        e2 = abs(exterior_derivative_fd(alpha_real, x, R, v, h))
        res.append(max(e1, e2))
        pts.append(x)
    return _report("reeb", res, pts, threshold, n=n)


def check_round_trip(n: int = 3, count: int = 1000, seed: int = 4, threshold=1e-12):
    rng = np.random.default_rng(seed)
    res, pts = [], []
    for _ in range(count):
        j = int(rng.integers(1, n + 1))
        p = random_chart_point(rng, n, j)
        phase = np.exp(1j * rng.uniform(0, 2 * math.pi))
        back = chart_locate(phase * chart_embed(p), j)
        res.append(float(np.max(np.abs(back.z - p.z))))
        pts.append(to_real(p.z))
    return _report("chart_round_trip", res, pts, threshold, n=n)


def check_omega0_complex_invariance(n: int = 3, count: int = 1000, seed: int = 5, threshold=1e-12):
    rng = np.random.default_rng(seed)
    res = []
    for _ in range(count):
        u, v = rng.normal(size=2 * n), rng.normal(size=2 * n)
        res.append(abs(omega0_eval(complex_structure(u), complex_structure(v)) - omega0_eval(u, v)))
    return _report("omega0_J_invariance", res, [()] * count, threshold, n=n)


def chart_identity_reports(n: int = 3, count: int = 1000, seed: int = 0) -> list[VerificationReport]:
    return [
        check_round_trip(n, count, seed + 4),
        check_darboux(n, count, seed),
        check_trivialized_alpha(n, count, seed + 1),
        check_transition_cocycle(n, count, seed + 2),
        check_reeb(n, count, seed + 3),
    ]
