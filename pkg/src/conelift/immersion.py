"""Parameter domains, parametric immersions into CP^{n-1} and parameter paths."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .charts import fubini_study_eval
from .config import DEFAULT, Tolerances

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ParameterDomain:
    """Torus T^d (angles in R^d mod 2 pi) or round sphere S^d inside R^{d+1}."""

    kind: str
    d: int

    def __post_init__(self):
        if self.kind not in ("torus", "sphere"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.d < 1:
            raise ValueError("domain dimension must be at least 1")

    @property
    def ambient_dim(self) -> int:
        return self.d if self.kind == "torus" else self.d + 1

    def retract(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "torus":
            return np.mod(x, TWO_PI)
        return x / np.linalg.norm(x, axis=-1, keepdims=True)

    def tangent_basis(self, x: np.ndarray) -> np.ndarray:
        """Orthonormal tangent frame at x as rows, shape ``(d, ambient_dim)``."""
        if self.kind == "torus":
            return np.eye(self.d)
        x = np.asarray(x, dtype=float)
        x = x / np.linalg.norm(x)
        # the last d left-singular vectors of x span its orthogonal complement
        u, _, _ = np.linalg.svd(x.reshape(-1, 1))
        return u[:, 1:].T.copy()

    def distance(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "torus":
            d = np.mod(x - y, TWO_PI)
            d = np.minimum(d, TWO_PI - d)
            return np.sqrt(np.sum(d * d, axis=-1))
        c = np.clip(np.sum(x * y, axis=-1), -1.0, 1.0)
        return np.arccos(c)

    def grid(self, density: int, seed: int = 0) -> np.ndarray:
        """Deterministic sample set: a product grid on the torus, a Fibonacci
        lattice (d = 2) or seeded Gaussian directions on the sphere."""
        if density < 2:
            raise ValueError("grid density must be at least 2")
        if self.kind == "torus":
            axes = [np.arange(density) * TWO_PI / density] * self.d
            mesh = np.meshgrid(*axes, indexing="ij")
            return np.stack([m.reshape(-1) for m in mesh], axis=-1)
        count = density ** self.d
        if self.d == 2:
            k = np.arange(count) + 0.5
            z = 1.0 - 2.0 * k / count
            phi = k * math.pi * (3.0 - math.sqrt(5.0))
            rho = np.sqrt(1.0 - z * z)
            return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)
        g = np.random.default_rng(seed).normal(size=(count, self.d + 1))
        return g / np.linalg.norm(g, axis=-1, keepdims=True)

    def spacing(self, density: int) -> float:
        """Typical distance between neighbouring grid samples."""
        if self.kind == "torus":
            return TWO_PI / density
        k = self.d + 1
        area = 2.0 * math.pi ** (k / 2) / math.gamma(k / 2)
        return (area / density ** self.d) ** (1.0 / self.d)


@dataclass
class PathSpec:
    """A parameter path ``s -> curve(s)`` for s in [0, 1].

    ``velocity`` is optional; a central difference of ``curve`` is used
    otherwise. Both callables take arrays of s and return ``(len(s), D)``.
    """

    curve: Callable[[np.ndarray], np.ndarray]
    velocity: Optional[Callable[[np.ndarray], np.ndarray]] = None
    samples: int = 129

    def __post_init__(self):
        if self.samples < 2:
            raise ValueError("a path needs at least two samples")

    def at(self, s) -> np.ndarray:
        return np.asarray(self.curve(np.atleast_1d(np.asarray(s, dtype=float))), dtype=float)

    def speed(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if self.velocity is not None:
            return np.asarray(self.velocity(s), dtype=float)
        h = 1e-6
        return (self.at(s + h) - self.at(s - h)) / (2 * h)

    @staticmethod
    def segment(p, q, samples: int = 129) -> "PathSpec":
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        step = q - p
        return PathSpec(
            lambda s: p + s[:, None] * step,
            lambda s: np.broadcast_to(step, (s.size, step.size)),
            samples,
        )

    @staticmethod
    def great_arc(p, q, samples: int = 129) -> "PathSpec":
        """Shortest great-circle arc between two non-antipodal unit vectors."""
        p = np.asarray(p, dtype=float) / np.linalg.norm(p)
        q = np.asarray(q, dtype=float) / np.linalg.norm(q)
        c = float(np.clip(p @ q, -1.0, 1.0))
        ang = math.acos(c)
        if ang < 1e-15:
            return PathSpec.segment(p, p, samples)
        if math.pi - ang < 1e-9:
            raise ValueError("great arc between antipodal points is not unique")
        w = q - c * p
        w /= np.linalg.norm(w)
        return PathSpec(
            lambda s: np.cos(ang * s)[:, None] * p + np.sin(ang * s)[:, None] * w,
            lambda s: ang * (-np.sin(ang * s)[:, None] * p + np.cos(ang * s)[:, None] * w),
            samples,
        )


def polyline(points, samples: int = 129) -> list[PathSpec]:
    """Piecewise-linear path as a list of straight pieces."""
    pts = [np.asarray(p, dtype=float) for p in points]
    return [PathSpec.segment(a, b, samples) for a, b in zip(pts[:-1], pts[1:])]


class ImmersionError(ValueError):
    pass


@dataclass
class ParametricImmersion:
    """A map from a parameter domain to CP^{n-1}.

    ``func`` takes an array of ambient parameters ``(..., D)`` and returns
    homogeneous representatives ``(..., n)``; they are normalized here.
    ``jacobian`` (optional) returns complex derivatives of the same
    representative, shape ``(..., n, D)``. ``kinks`` maps a parameter axis
    to the (2 pi periodic) values where the map is only C^1; quadrature
    splits there.
    """

    domain: ParameterDomain
    n: int
    func: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    h1_generators: list = field(default_factory=list)
    name: str = "immersion"
    params: dict = field(default_factory=dict)
    fd_step: float = 1e-5
    kinks: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("ambient dimension n must be at least 2")
        if self.domain.d != self.n - 1:
            raise ValueError("domain dimension must equal n - 1")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        h = np.asarray(self.func(x), dtype=complex)
        if h.shape[-1] != self.n:
            raise ImmersionError(f"{self.name} returned {h.shape[-1]} coordinates, expected {self.n}")
        return h / np.linalg.norm(h, axis=-1, keepdims=True)

    def directional(self, x, v) -> np.ndarray:
        """Derivative of the normalized representative along ambient vector v.

        Accepts matching leading dimensions on x and v.
        """
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.jacobian is not None:
            raw = np.asarray(self.func(x), dtype=complex)
            nrm = np.linalg.norm(raw, axis=-1, keepdims=True)
            draw = np.einsum("...ij,...j->...i", np.asarray(self.jacobian(x), dtype=complex), v)
            # d(raw/|raw|) = draw/|raw| - raw Re<raw, draw>/|raw|^3
            radial = np.real(np.sum(np.conj(raw) * draw, axis=-1, keepdims=True))
            return draw / nrm - raw * radial / nrm ** 3
        h = self.fd_step
        return (-self(x + 2 * h * v) + 8 * self(x + h * v) - 8 * self(x - h * v) + self(x - 2 * h * v)) / (12 * h)

    def tangent_images(self, x) -> np.ndarray:
        """``df`` applied to an orthonormal tangent frame at x, shape (d, n)."""
        x = np.asarray(x, dtype=float)
        basis = self.domain.tangent_basis(x)
        return self.directional(np.broadcast_to(x, basis.shape), basis)

    def check_immersion(self, samples: np.ndarray, tol: Tolerances = DEFAULT) -> float:
        """Smallest singular value of the horizontal differential over samples."""
        worst = math.inf
        for x in samples:
            h = self(x)
            vecs = self.tangent_images(x)
            horiz = vecs - np.outer(vecs @ np.conj(h), h)
            real = np.concatenate([horiz.real, horiz.imag], axis=1)
            worst = min(worst, float(np.linalg.svd(real, compute_uv=False)[-1]))
        if worst <= tol.rank_tol:
            raise ImmersionError(f"{self.name} is not an immersion: min singular value {worst:.3e}")
        return worst

    def lagrangian_residual(self, x) -> float:
        """Largest |omega_FS| over coordinate 2-planes at x."""
        h = self(x)
        vecs = self.tangent_images(x)
        worst = 0.0
        for a in range(len(vecs)):
            for b in range(a + 1, len(vecs)):
                worst = max(worst, abs(fubini_study_eval(h, vecs[a], vecs[b])))
        return worst


def torus_generators(d: int, base=None) -> list[PathSpec]:
    """The d coordinate loops through ``base`` (default the origin)."""
    base = np.zeros(d) if base is None else np.asarray(base, dtype=float)
    loops = []
    for i in range(d):
        end = base.copy()
        end[i] += TWO_PI
        loops.append(PathSpec.segment(base, end))
    return loops
