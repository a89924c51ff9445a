"""Named tolerances shared by every module.

All numerical thresholds live in one frozen dataclass so the CLI can surface
them as flags and tests can override a single field with
``dataclasses.replace``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # chart atlas
    locate_tol: float = 1e-10
    norm_tol: float = 1e-10
    tangency_tol: float = 1e-8
    chart_margin: float = 0.35
    # quadrature
    quad_tol: float = 1e-10
    max_depth: int = 24
    # lifting conditions
    hol_tol: float = 1e-7
    sep_margin: float = 1e-3
    # immersion / double points
    rank_tol: float = 1e-6
    lagr_tol: float = 1e-6
    dp_tol: float = 1e-10
    newton_iters: int = 50
    # verifier
    fd_step: float = 1e-5
    legendrian_tol: float = 1e-6
    cone_tol: float = 1e-6
    special_tol: float = 1e-6
    # grid smoothing
    smooth_area_tol: float = 1e-2

    def margin_for(self, n: int) -> float:
        """Chart-switch margin for ambient dimension ``n``.

        The largest homogeneous coordinate of a unit vector is at least
        ``1/sqrt(n)``, so the margin has to stay below that.
        """
        return min(self.chart_margin, 0.9 / math.sqrt(n))

    def validate(self) -> None:
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value <= 0:
                raise ValueError(f"tolerance {f.name} must be positive, got {value}")

    def replace(self, **changes) -> "Tolerances":
        return dataclasses.replace(self, **changes)


DEFAULT = Tolerances()


def wrap_angle(t):
    """Reduce an angle (or array of angles) to [0, 2*pi)."""
    return t % (2.0 * math.pi)


def circular_distance(a, b):
    """Shortest distance between two angles on the circle."""
    d = (a - b) % (2.0 * math.pi)
    return min(d, 2.0 * math.pi - d) if isinstance(d, float) else _vec_circ(d)


def _vec_circ(d):
    import numpy as np

    d = np.asarray(d)
    return np.minimum(d, 2.0 * np.pi - d)


def signed_angle(t):
    """Representative of ``t`` mod 2*pi in (-pi, pi]."""
    r = math.remainder(t, 2.0 * math.pi)
    return math.pi if r == -math.pi else r
