"""Hemispherical charts on CP^{n-1} and the Hopf-bundle trivializations.

Chart indices are 1-based (``1 <= j <= n``).  A chart point stores the
n-1 complex coordinates with the j-th slot removed; the projective point it
represents is obtained by inserting ``sqrt(1 - |z|^2)`` into slot j.

Real tangent vectors are interleaved: ``(x1, y1, x2, y2, ...)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances, wrap_angle


class ChartDomainError(ValueError):
    """Chart coordinates outside the open unit ball."""


class ChartMissError(ValueError):
    """The requested chart does not contain the point."""


def as_complex_vector(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(z)):
        raise ValueError("complex vector has non-finite entries")
    return z


def to_real(z: np.ndarray) -> np.ndarray:
    """Interleave a complex vector as ``(x1, y1, x2, y2, ...)``."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def to_complex(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v[..., 0::2] + 1j * v[..., 1::2]


@dataclass(frozen=True)
class ChartPoint:
    chart: int
    z: np.ndarray

    def __post_init__(self):
        z = as_complex_vector(self.z)
        object.__setattr__(self, "z", z)
        n = z.size + 1
        if not 1 <= self.chart <= n:
            raise ValueError(f"chart index {self.chart} outside 1..{n}")

    @property
    def n(self) -> int:
        return self.z.size + 1

    def full(self, k: int) -> complex:
        """Coordinate ``z_k`` in C^n numbering (``k != chart``)."""
        if k == self.chart:
            raise KeyError("the chart slot is not a coordinate of B_j")
        return self.z[k - 1 if k < self.chart else k - 2]


@dataclass(frozen=True)
class FiberedChartPoint:
    base: ChartPoint
    t: float

    def __post_init__(self):
        object.__setattr__(self, "t", float(wrap_angle(self.t)))


def _insert(z: np.ndarray, j: int, value) -> np.ndarray:
    return np.insert(z.astype(complex), j - 1, value)


def chart_embed(p: ChartPoint) -> np.ndarray:
    """Unit-norm homogeneous representative of ``psi_j(z)``."""
    r2 = float(np.vdot(p.z, p.z).real)
    if r2 >= 1.0:
        raise ChartDomainError(f"|z|^2 = {r2} is not inside the unit ball")
    return _insert(p.z, p.chart, np.sqrt(1.0 - r2))


def bundle_embed(p: FiberedChartPoint) -> np.ndarray:
    """``Psi_j(z, e^{it}) = e^{it} psi_j(z)`` as a point of S^{2n-1}."""
    return np.exp(1j * p.t) * chart_embed(p.base)


def gauge(h: np.ndarray, j: int, tol: Tolerances = DEFAULT) -> tuple[np.ndarray, float]:
    """Rotate ``h`` so its j-th entry is real positive.

    Returns the rotated unit vector and the fiber angle ``arg h_j`` that was
    removed, i.e. ``h = e^{i angle} * rotated``.
    """
    h = as_complex_vector(h)
    nrm = np.linalg.norm(h)
    if nrm == 0.0:
        raise ChartMissError("zero vector is not a projective point")
    hj = h[j - 1]
    if abs(hj) / nrm <= tol.locate_tol:
        raise ChartMissError(f"coordinate {j} vanishes; point is not in chart {j}")
    phase = hj / abs(hj)
    return h * np.conj(phase) / nrm, float(np.angle(hj))


def chart_locate(h, j: int, tol: Tolerances = DEFAULT) -> ChartPoint:
    """Chart-j coordinates of the projective point with representative ``h``."""
    rotated, _ = gauge(h, j, tol)
    return ChartPoint(j, np.delete(rotated, j - 1))


def sphere_locate(w, j: int, tol: Tolerances = DEFAULT) -> FiberedChartPoint:
    """Inverse of ``bundle_embed`` on the chart-j trivialization."""
    w = as_complex_vector(w)
    if abs(np.linalg.norm(w) - 1.0) > tol.norm_tol:
        raise ValueError("point is not on the unit sphere")
    rotated, angle = gauge(w, j, tol)
    return FiberedChartPoint(ChartPoint(j, np.delete(rotated, j - 1)), angle)


def transition_point(p: FiberedChartPoint, k: int, tol: Tolerances = DEFAULT) -> FiberedChartPoint:
    """Express a point of ``B_j x S^1`` in the chart ``B_k x S^1``.

    Coordinates get multiplied by ``conj(z_k)/|z_k|``, the chart slot becomes
    ``|z_k|`` and the fiber angle advances by ``arg z_k``.
    """
    j = p.base.chart
    if k == j:
        return p
    zk = p.base.full(k)
    if abs(zk) <= tol.locate_tol:
        raise ChartMissError(f"z_{k} vanishes; point is not in chart {k}")
    u = np.conj(zk) / abs(zk)
    full = _insert(p.base.z, j, np.sqrt(max(0.0, 1.0 - float(np.vdot(p.base.z, p.base.z).real))))
    full = full * u
    full[k - 1] = abs(zk)
    return FiberedChartPoint(ChartPoint(k, np.delete(full, k - 1)), p.t + float(np.angle(zk)))


# ----------------------------------------------------------------------------
# standard forms
# ----------------------------------------------------------------------------

def tau_eval(j: int, p: ChartPoint, v) -> float:
    """``tau_j(v) = -sum_{i != j} (x_i dy_i - y_i dx_i)(v)`` at chart point p."""
    if p.chart != j:
        raise ValueError(f"point lives in chart {p.chart}, not {j}")
    x = to_real(p.z)
    v = np.asarray(v, dtype=float)
    if v.shape != x.shape:
        raise ValueError("tangent vector has the wrong dimension")
    return -float(np.dot(x[0::2], v[1::2]) - np.dot(x[1::2], v[0::2]))


def alpha_eval(w, v) -> float:
    """Ambient ``alpha_0 = 1/2 sum (x_i dy_i - y_i dx_i)`` at w on v."""
    x = to_real(as_complex_vector(w))
    v = np.asarray(v, dtype=float)
    return 0.5 * float(np.dot(x[0::2], v[1::2]) - np.dot(x[1::2], v[0::2]))


def omega0_eval(v, u) -> float:
    """Standard symplectic form ``sum dx_i ^ dy_i`` on real vectors."""
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    if v.shape != u.shape or v.size % 2:
        raise ValueError("omega0 needs two vectors of the same even dimension")
    return float(np.dot(v[0::2], u[1::2]) - np.dot(v[1::2], u[0::2]))


def complex_structure(v) -> np.ndarray:
    """Multiplication by i on an interleaved real vector."""
    return to_real(1j * to_complex(v))


def fubini_study_eval(z, a, b) -> float:
    """Pullback of the Fubini-Study form to C^n minus 0 on complex vectors a, b.

    Evaluates ``(i/2)|z|^-4 sum_k sum_{j != k} (conj(z_j) z_j dz_k^dzbar_k
    - conj(z_j) z_k dz_j^dzbar_k)`` with ``(dz_p ^ dzbar_q)(a, b) =
    a_p conj(b_q) - b_p conj(a_q)``.
    """
    z = as_complex_vector(z)
    a = as_complex_vector(a)
    b = as_complex_vector(b)
    wedge = np.outer(a, np.conj(b)) - np.outer(b, np.conj(a))  # [p, q]
    mod2 = np.abs(z) ** 2
    off = np.ones((z.size, z.size)) - np.eye(z.size)  # j != k
    # first family: sum_k (sum_{j != k} |z_j|^2) dz_k ^ dzbar_k
    first = np.sum((off @ mod2) * np.diag(wedge))
    # second family: sum_k sum_{j != k} conj(z_j) z_k dz_j ^ dzbar_k
    coeff = np.outer(np.conj(z), z) * off  # [j, k]
    second = np.sum(coeff * wedge)
    value = 0.5j * (first - second) / np.sum(mod2) ** 2
    return float(value.real)


def reeb_vector(w) -> np.ndarray:
    """``R = 2 T_z`` as an interleaved real vector (Hopf direction)."""
    return to_real(2j * as_complex_vector(w))


def radial_vector(w) -> np.ndarray:
    return to_real(as_complex_vector(w))


def exterior_derivative_fd(form, x, u, v, h: float = 1e-5) -> float:
    """``d(form)(u, v)`` for a 1-form given as ``form(x, vec)``, via central
    differences of its coefficients along constant vector fields."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    du_fv = (form(x + h * u, v) - form(x - h * u, v)) / (2 * h)
    dv_fu = (form(x + h * v, u) - form(x - h * v, u)) / (2 * h)
    return du_fv - dv_fu
