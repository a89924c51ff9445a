"""Adaptive Simpson quadrature, refined breadth-first so the integrand is
called on whole arrays of abscissae at once."""

from __future__ import annotations

import numpy as np


class QuadratureError(RuntimeError):
    """Adaptive refinement hit ``max_depth`` before meeting the tolerance."""


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-10, max_depth: int = 24) -> float:
    """Integrate a vectorized ``f`` over ``[a, b]``.

    Each panel is accepted when the two-halves Simpson estimate differs
    from the whole-panel one by at most ``15 * tol_panel``; the tolerance is
    halved with each split. The accepted value includes the Richardson
    correction ``(S2 - S1) / 15``.
    """
    if a == b:
        return 0.0
    lo = np.array([a], dtype=float)
    hi = np.array([b], dtype=float)
    fa, fm, fb = (np.atleast_1d(f(np.array([x]))).astype(float) for x in (a, 0.5 * (a + b), b))
    whole = (hi - lo) / 6.0 * (fa + 4 * fm + fb)
    eps = np.array([tol])
    total = 0.0
    for depth in range(max_depth + 1):
        mid = 0.5 * (lo + hi)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        vals = np.asarray(f(np.concatenate([lm, rm])), dtype=float)
        flm, frm = vals[: lo.size], vals[lo.size:]
        left = (mid - lo) / 6.0 * (fa + 4 * flm + fm)
        right = (hi - mid) / 6.0 * (fm + 4 * frm + fb)
        diff = left + right - whole
        ok = np.abs(diff) <= 15.0 * eps
        total += float(np.sum((left + right + diff / 15.0)[ok]))
        if ok.all():
            return total
        if depth == max_depth:
            break
        keep = ~ok
        lo, mid, hi = lo[keep], mid[keep], hi[keep]
        fa, flm, fm, frm, fb = fa[keep], flm[keep], fm[keep], frm[keep], fb[keep]
        left, right, eps = left[keep], right[keep], eps[keep] / 2.0
        lo = np.concatenate([lo, mid])
        hi = np.concatenate([mid, hi])
        fa, fm, fb = np.concatenate([fa, fm]), np.concatenate([flm, frm]), np.concatenate([fm, fb])
        whole = np.concatenate([left, right])
        eps = np.concatenate([eps, eps])
    raise QuadratureError(
        f"adaptive Simpson did not reach tol={tol} on [{a}, {b}] within depth {max_depth}"
    )


def composite_simpson(f, a: float, b: float, panels: int = 2000) -> float:
    """Fixed-step Simpson rule; used as an independent check."""
    if panels % 2:
        panels += 1
    x = np.linspace(a, b, panels + 1)
    y = np.asarray(f(x), dtype=float)
    h = (b - a) / panels
    return float(h / 3.0 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum()))
