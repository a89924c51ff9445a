"""Example immersions: the Harvey-Lawson family and its perturbation, the
trivial cone, and a non-liftable product torus."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .immersion import ImmersionError, ParameterDomain, ParametricImmersion, torus_generators
from .lifting import LiftedMap


class RadiusOverflowError(ImmersionError):
    """Chart coordinates leave the unit ball for some parameter value."""


class RadicandError(ImmersionError):
    """A square-root argument in a perturbed radius goes negative."""

    def __init__(self, message, theta):
        super().__init__(message)
        self.theta = theta


@dataclass(frozen=True)
class HLParams:
    n: int = 3
    eps: float = 0.0

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("the HL family needs n >= 3")
        if not 0.0 <= self.eps < math.sqrt(2.0 / self.n):
            raise ValueError(f"eps must satisfy 0 <= eps < sqrt(2/n) = {math.sqrt(2.0 / self.n):.6f}")

    @property
    def delta(self) -> float:
        return math.sqrt(1.0 / self.n - self.eps ** 2 / 2.0)

    def radius(self, s):
        return self.delta + self.eps * np.sin(s)


def _theta_sum(x):
    return np.sum(np.asarray(x, dtype=float), axis=-1)


def hl_immersion(p: HLParams) -> ParametricImmersion:
    """``theta -> (r e^{i(s + theta_k)})_k`` in chart n, with ``s = sum theta``."""
    n, d = p.n, p.n - 1
    rmax = p.delta + p.eps
    if (n - 1) * rmax ** 2 >= 1.0:
        raise RadiusOverflowError(
            f"(n-1) r^2 reaches {(n - 1) * rmax ** 2:.6f} >= 1 at sum(theta) = pi/2 (eps={p.eps}, n={n})"
        )

    def func(x):
        x = np.asarray(x, dtype=float)
        s = _theta_sum(x)
        r = p.radius(s)
        coords = r[..., None] * np.exp(1j * (s[..., None] + x))
        last = np.sqrt(1.0 - d * r ** 2)
        return np.concatenate([coords, last[..., None] + 0j], axis=-1)

    def jac(x):
        x = np.asarray(x, dtype=float)
        s = _theta_sum(x)
        r = p.radius(s)
        dr = p.eps * np.cos(s)
        phase = np.exp(1j * (s[..., None] + x))  # (..., d)
        eye = np.eye(d)
        # d f_k / d theta_m = (dr + i r (1 + [k = m])) e^{i phi_k}
        top = (dr[..., None, None] + 1j * r[..., None, None] * (1.0 + eye)) * phase[..., :, None]
        last = np.sqrt(1.0 - d * r ** 2)
        dlast = -d * r * dr / last
        bottom = np.broadcast_to(dlast[..., None, None], top.shape[:-2] + (1, d)) + 0j
        return np.concatenate([top, bottom], axis=-2)

    return ParametricImmersion(
        ParameterDomain("torus", d), n, func, jac, torus_generators(d), "hl", {"n": n, "eps": p.eps}
    )


def hl_t_closed_form(p: HLParams, theta) -> float:
    """Closed form as usually quoted, ``-s - 2 delta eps cos s + eps^2 sin(2s)/4``."""
    s = float(_theta_sum(theta))
    return -s - 2.0 * p.delta * p.eps * math.cos(s) + 0.25 * p.eps ** 2 * math.sin(2.0 * s)


def hl_t_exact(p: HLParams, theta) -> float:
    """Antiderivative of ``dt/ds = -n r(s)^2``:
    ``-s + 2 n delta eps cos s + n eps^2 sin(2s)/4``."""
    s = _theta_sum(theta)
    return -s + 2.0 * p.n * p.delta * p.eps * np.cos(s) + 0.25 * p.n * p.eps ** 2 * np.sin(2.0 * s)


def hl_lift(p: HLParams, tol: Tolerances = DEFAULT) -> LiftedMap:
    """Closed-form lift ``e^{i t} (f, sqrt(1 - (n-1) r^2))`` with exact t."""
    f = hl_immersion(p)
    base = np.zeros(p.n - 1)
    return LiftedMap(f, base, float(hl_t_exact(p, base)), tol, lambda x: float(hl_t_exact(p, x)), p.n)


def hl_perturbed_check(p: HLParams) -> None:
    """Reject eps where a perturbed radius or the chart slot goes imaginary.

    ``r1^2 = r^2 - 2 eps cos(theta1)/3`` is smallest at r = delta - eps,
    theta1 = 0; ``r1^2 + r2^2 = 2 r^2 - eps cos(theta1)/3`` is largest at
    r = delta + eps, theta1 = pi. Both extremes are attained.
    """
    lo = (p.delta - p.eps) ** 2 - 2.0 * p.eps / 3.0
    if lo <= 0.0:
        raise RadicandError(f"r1^2 reaches {lo:.6f} <= 0", (0.0, -math.pi / 2))
    hi = 2.0 * (p.delta + p.eps) ** 2 + p.eps / 3.0
    if hi >= 1.0:
        raise RadicandError(f"r1^2 + r2^2 reaches {hi:.6f} >= 1", (math.pi, -math.pi / 2))


def _perturbed_radii(p: HLParams, x):
    x = np.asarray(x, dtype=float)
    s = _theta_sum(x)
    r = p.radius(s)
    c = np.cos(x[..., 0])
    r1 = np.sqrt(r ** 2 - 2.0 * p.eps * c / 3.0)
    r2 = np.sqrt(r ** 2 + p.eps * c / 3.0)
    return r1, r2


def hl_perturbed(p: HLParams) -> ParametricImmersion:
    """Perturbation of the n = 3 HL torus with transverse double points."""
    if p.n != 3:
        raise ValueError("the perturbed HL torus is defined for n = 3 only")
    hl_perturbed_check(p)

    def func(x):
        x = np.asarray(x, dtype=float)
        r1, r2 = _perturbed_radii(p, x)
        t1, t2 = x[..., 0], x[..., 1]
        return np.stack(
            [
                r1 * np.exp(1j * (2 * t1 + t2)),
                r2 * np.exp(1j * (t1 + 2 * t2)),
                np.sqrt(1.0 - r1 ** 2 - r2 ** 2) + 0j,
            ],
            axis=-1,
        )

    def jac(x):
        x = np.asarray(x, dtype=float)
        s = _theta_sum(x)
        r = p.radius(s)
        dr = p.eps * np.cos(s)
        t1, t2 = x[..., 0], x[..., 1]
        r1, r2 = _perturbed_radii(p, x)
        sn = np.sin(t1)
        # derivatives of r1^2, r2^2 with respect to theta1, theta2
        q1 = [2 * r * dr + 2 * p.eps * sn / 3.0, 2 * r * dr]
        q2 = [2 * r * dr - p.eps * sn / 3.0, 2 * r * dr]
        e1 = np.exp(1j * (2 * t1 + t2))
        e2 = np.exp(1j * (t1 + 2 * t2))
        last = np.sqrt(1.0 - r1 ** 2 - r2 ** 2)
        cols = []
        for m, (w1, w2) in enumerate([(2, 1), (1, 2)]):
            a = (q1[m] / (2 * r1) + 1j * w1 * r1) * e1
            b = (q2[m] / (2 * r2) + 1j * w2 * r2) * e2
            c = -(q1[m] + q2[m]) / (2 * last) + 0j
            cols.append(np.stack([a, b, c], axis=-1))
        return np.stack(cols, axis=-1)

    return ParametricImmersion(
        ParameterDomain("torus", 2), 3, func, jac, torus_generators(2), "hl-perturbed", {"n": 3, "eps": p.eps}
    )


def hl_perturbed_fiber_shift(p: HLParams, x):
    """``s_eps = eps sin(theta1)``."""
    return p.eps * np.sin(np.asarray(x, dtype=float)[..., 0])


def hl_perturbed_lift(p: HLParams, tol: Tolerances = DEFAULT) -> LiftedMap:
    g = hl_perturbed(p)
    t = lambda x: float(hl_t_exact(p, x) + hl_perturbed_fiber_shift(p, x))
    base = np.zeros(2)
    return LiftedMap(g, base, t(base), tol, t, 3)


def perturbation_residuals(p: HLParams, x) -> tuple[float, float]:
    """Residuals of the two fiber-shift equations for ``s = eps sin(theta1)``."""
    x = np.asarray(x, dtype=float)
    r = p.radius(_theta_sum(x))
    r1, r2 = _perturbed_radii(p, x)
    s1, s2 = r1 - r, r2 - r
    ds1, ds2 = p.eps * math.cos(x[0]), 0.0
    e1 = ds1 + 2 * r * (2 * s1 + s2) + 2 * s1 ** 2 + s2 ** 2
    e2 = ds2 + 2 * r * (s1 + 2 * s2) + s1 ** 2 + 2 * s2 ** 2
    return float(e1), float(e2)


@dataclass(frozen=True)
class TrivialConeParams:
    eta: tuple = (1.0, 1.0, 1.0)
    perturb: float = 0.0

    def __post_init__(self):
        eta = tuple(complex(e) for e in self.eta)
        object.__setattr__(self, "eta", eta)
        if len(eta) < 2:
            raise ValueError("eta needs at least two entries")
        if any(e == 0 for e in eta):
            raise ValueError("every entry of eta must be nonzero")
        if self.perturb < 0:
            raise ValueError("perturbation parameter must be nonnegative")
        if self.perturb > 0 and (len(eta) != 3 or any(e != 1 for e in eta)):
            raise ValueError("the perturbed trivial cone is defined for n = 3, eta = (1, 1, 1) only")

    @property
    def n(self) -> int:
        return len(self.eta)


def trivial_cone_immersion(p: TrivialConeParams) -> ParametricImmersion:
    """``x -> [x_1 eta_1 : ... : x_n eta_n]`` on the unit sphere.

    With a perturbation the k-th entry becomes ``x_k e^{i eps x_k}``; on
    each hemisphere this agrees with the chart-by-chart formulas, including
    the sign of the square-root slot.
    """
    eta = np.array(p.eta, dtype=complex)
    n = p.n
    eps = p.perturb

    if eps == 0:
        func = lambda x: np.asarray(x, dtype=float) * eta
        jac = lambda x: np.broadcast_to(np.diag(eta), np.shape(x)[:-1] + (n, n))
    else:
        func = lambda x: np.asarray(x, dtype=float) * np.exp(1j * eps * np.asarray(x, dtype=float))

        def jac(x):
            x = np.asarray(x, dtype=float)
            diag = (1.0 + 1j * eps * x) * np.exp(1j * eps * x)
            return diag[..., :, None] * np.eye(n)

    return ParametricImmersion(
        ParameterDomain("sphere", n - 1), n, func, jac, [], "trivial",
        {"eta": [str(e) for e in p.eta], "perturb": eps},
    )


def trivial_chart_map(p: TrivialConeParams, j: int, sign: int, y) -> np.ndarray:
    """Chart-by-chart form ``f_j^{+/-}`` on the coordinates with x_j removed."""
    y = np.asarray(y, dtype=float)
    eps = p.perturb
    root = math.sqrt(1.0 - float(np.sum(y * y)))
    entries = list(y * np.exp(1j * eps * y))
    entries.insert(j - 1, sign * np.exp(sign * 1j * eps * root) * root)
    return np.array(entries, dtype=complex)


def clifford_torus(r1: float = 0.45, r2: float = 0.45) -> ParametricImmersion:
    """Product torus ``(r1 e^{i theta1}, r2 e^{i theta2})`` in chart 3.

    Lagrangian, but its generators have holonomy ``-2 pi r_k^2``, so it has
    no global lift unless ``r_k^2`` is an integer.
    """
    if r1 ** 2 + r2 ** 2 >= 1:
        raise RadiusOverflowError("r1^2 + r2^2 must be < 1")

    def func(x):
        x = np.asarray(x, dtype=float)
        last = math.sqrt(1.0 - r1 ** 2 - r2 ** 2)
        return np.stack(
            [r1 * np.exp(1j * x[..., 0]), r2 * np.exp(1j * x[..., 1]), np.full(x.shape[:-1], last) + 0j], axis=-1
        )

    return ParametricImmersion(
        ParameterDomain("torus", 2), 3, func, None, torus_generators(2), "clifford", {"r1": r1, "r2": r2}
    )


def broken_hl(p: HLParams, bump: float = 0.05) -> ParametricImmersion:
    """HL map with ``bump * theta1`` added to the first radius only; not
    Lagrangian."""
    base = hl_immersion(p)
    d = p.n - 1

    def func(x):
        x = np.asarray(x, dtype=float)
        s = _theta_sum(x)
        r = p.radius(s)
        radii = np.repeat(r[..., None], d, axis=-1)
        radii[..., 0] = radii[..., 0] + bump * x[..., 0]
        coords = radii * np.exp(1j * (s[..., None] + x))
        last = np.sqrt(np.clip(1.0 - np.sum(radii ** 2, axis=-1), 0.0, None))
        return np.concatenate([coords, last[..., None] + 0j], axis=-1)

    return ParametricImmersion(base.domain, p.n, func, None, [], "hl-broken", {"eps": p.eps, "bump": bump})


@dataclass
class SphereMap:
    """A plain map from a parameter domain into S^{2n-1} (no lifting)."""

    domain: ParameterDomain
    n: int
    func: object
    name: str = "sphere-map"

    def point(self, x) -> np.ndarray:
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=complex)


def round_sphere_in_c_times_r() -> SphereMap:
    """``x -> (x1 + i x2, x3, 0)``: a round S^2 in S^5 that is not Legendrian."""
    return SphereMap(
        ParameterDomain("sphere", 2), 3, lambda x: np.array([x[0] + 1j * x[1], x[2], 0.0], dtype=complex),
        "round-s2",
    )


MODEL_NAMES = ("hl", "hl-perturbed", "trivial", "clifford")
