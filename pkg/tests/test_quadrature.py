import math

import numpy as np
import pytest

from conelift.quadrature import QuadratureError, adaptive_simpson, composite_simpson


def test_polynomial_exact():
    assert math.isclose(adaptive_simpson(lambda x: x ** 3 - 2 * x, 0.0, 2.0), 0.0, abs_tol=1e-14)


def test_smooth_periodic():
    val = adaptive_simpson(lambda x: np.exp(np.sin(x)), 0.0, 2 * math.pi, tol=1e-12)
    assert math.isclose(val, 2 * math.pi * 1.2660658777520082, rel_tol=1e-11)


def test_reversed_and_empty_interval():
    f = np.cos
    assert adaptive_simpson(f, 1.0, 1.0) == 0.0
    assert math.isclose(adaptive_simpson(f, 1.0, 0.0), -math.sin(1.0), rel_tol=1e-10)


def test_agrees_with_composite_rule():
    f = lambda x: 1.0 / (1.0 + 25 * x ** 2)
    assert math.isclose(adaptive_simpson(f, -1, 1, tol=1e-12), composite_simpson(f, -1, 1, 20000), rel_tol=1e-10)
    assert math.isclose(adaptive_simpson(f, -1, 1, tol=1e-12), 0.4 * math.atan(5.0), rel_tol=1e-11)


def test_depth_exhaustion_raises():
    with pytest.raises(QuadratureError):
        adaptive_simpson(lambda x: np.sign(x - 0.3141), 0.0, 1.0, tol=1e-14, max_depth=6)
