"""Double points of immersions: grid search, Gauss-Newton refinement,
family detection, transversality and the separation check."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import DEFAULT, Tolerances, circular_distance, wrap_angle
from .immersion import TWO_PI, ParametricImmersion
from .lifting import separation

ISOLATED = "isolated"
CIRCLE = "circle"
SHEET = "sheet"


@dataclass
class DoublePointRecord:
    p: np.ndarray
    q: np.ndarray
    image_distance: float
    kind: str
    samples: list = field(default_factory=list)
    nullity: int = 0
    transverse: Optional[bool] = None
    min_singular: float = float("nan")
    separation: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "p": [float(v) for v in self.p],
            "q": [float(v) for v in self.q],
            "image_distance": float(self.image_distance),
            "family_samples": len(self.samples),
            "nullity": self.nullity,
            "transverse": self.transverse,
            "separation": None if self.separation is None else float(self.separation),
        }


@dataclass
class Solution:
    p: np.ndarray
    q: np.ndarray
    phi: float
    residual: float
    singular: np.ndarray


@dataclass
class SearchResult:
    records: list
    failures: list
    candidates: int


def projective_distance(h, k) -> np.ndarray:
    ip = np.abs(np.sum(np.conj(h) * k, axis=-1))
    return np.sqrt(np.clip(1.0 - ip ** 2, 0.0, None))


def phase_distance(h, k) -> float:
    """``min_phi |h - e^{i phi} k|``, evaluated without cancellation."""
    h = np.asarray(h, dtype=complex)
    k = np.asarray(k, dtype=complex)
    ip = np.vdot(k, h)
    phase = ip / abs(ip) if abs(ip) > 0 else 1.0
    return float(np.linalg.norm(h - phase * k))


def _tangent_frames(f: ParametricImmersion, x):
    basis = f.domain.tangent_basis(x)
    return basis, f.directional(np.broadcast_to(x, basis.shape), basis)


def _residual(f, p, q, phi):
    return f(p) - np.exp(1j * phi) * f(q)


def _real(v: np.ndarray) -> np.ndarray:
    return np.concatenate([v.real, v.imag], axis=0)


def refine_pair(f: ParametricImmersion, p, q, tol: Tolerances = DEFAULT, fixed_q: bool = False) -> Solution:
    """Gauss-Newton on ``|h(p) - e^{i phi} h(q)|^2`` over (p, q, phi).

    Steps use least squares, so on a family of solutions the iteration
    moves orthogonally onto it. With ``fixed_q`` only p and phi vary.
    """
    dom = f.domain
    p = dom.retract(np.asarray(p, dtype=float))
    q = dom.retract(np.asarray(q, dtype=float))
    hp, hq = f(p), f(q)
    phi = float(np.angle(np.vdot(hq, hp)))
    res = hp - np.exp(1j * phi) * hq
    jac = None
    for _ in range(tol.newton_iters):
        bp, dp = _tangent_frames(f, p)
        cols = [_real(v) for v in dp]
        if not fixed_q:
            bq, dq = _tangent_frames(f, q)
            cols += [_real(-np.exp(1j * phi) * v) for v in dq]
        cols.append(_real(-1j * np.exp(1j * phi) * f(q)))
        jac = np.stack(cols, axis=1)
        step = np.linalg.lstsq(jac, -_real(res), rcond=None)[0]
        d = dom.d
        p = dom.retract(p + step[:d] @ bp)
        if not fixed_q:
            q = dom.retract(q + step[d: 2 * d] @ bq)
        phi += step[-1]
        res = _residual(f, p, q, phi)
        if np.linalg.norm(step) < 1e-14 or np.linalg.norm(res) < 1e-15:
            break
    bp, dp = _tangent_frames(f, p)
    cols = [_real(v) for v in dp]
    if not fixed_q:
        _, dq = _tangent_frames(f, q)
        cols += [_real(-np.exp(1j * phi) * v) for v in dq]
    cols.append(_real(-1j * np.exp(1j * phi) * f(q)))
    jac = np.stack(cols, axis=1)
    sv = np.linalg.svd(jac, compute_uv=False)
    return Solution(p, q, float(wrap_angle(phi)), float(np.linalg.norm(res)), sv)


def pair_metric(dom, a, b) -> float:
    """Distance between unordered parameter pairs."""
    (p, q), (r, s) = a, b
    return float(min(dom.distance(p, r) + dom.distance(q, s), dom.distance(p, s) + dom.distance(q, r)))


def _horizontal(h, v):
    return v - np.sum(np.conj(h) * v, axis=-1, keepdims=True) * h


def _lipschitz(f: ParametricImmersion, pts: np.ndarray) -> float:
    """Largest Frobenius norm of the horizontal differential on the samples
    (projective distance only sees the horizontal part)."""
    imgs = f(pts)
    if f.domain.kind == "torus":
        total = np.zeros(len(pts))
        for i in range(f.domain.d):
            e = np.zeros_like(pts)
            e[:, i] = 1.0
            total += np.sum(np.abs(_horizontal(imgs, f.directional(pts, e))) ** 2, axis=-1)
        return float(np.sqrt(total.max()))
    worst = 0.0
    for x, hx in zip(pts, imgs):
        _, vecs = _tangent_frames(f, x)
        worst = max(worst, float(np.sqrt(np.sum(np.abs(_horizontal(hx, vecs)) ** 2))))
    return worst


def _pair_metric_many(dom, p, q, P, Q) -> np.ndarray:
    if len(P) == 0:
        return np.zeros(0)
    P = np.asarray(P)
    Q = np.asarray(Q)
    return np.minimum(dom.distance(p, P) + dom.distance(q, Q), dom.distance(p, Q) + dom.distance(q, P))


def candidate_pairs(f: ParametricImmersion, density: int, seed: int = 0, block: int = 1024):
    """Grid pairs whose images are closer than the sampling can resolve.

    Returns ``(points, pairs, distances, spacing)`` with pairs sorted by
    image distance.
    """
    dom = f.domain
    pts = dom.grid(density, seed)
    imgs = f(pts)
    h = dom.spacing(density)
    thr = _lipschitz(f, pts) * h * math.sqrt(dom.d)
    excl = 4.0 * h * math.sqrt(dom.d)
    rows, cols, dists = [], [], []
    for start in range(0, len(pts), block):
        stop = min(start + block, len(pts))
        ip = np.abs(np.conj(imgs[start:stop]) @ imgs.T)
        dist = np.sqrt(np.clip(1.0 - ip ** 2, 0.0, None))
        a, b = np.nonzero(dist < thr)
        a = a + start
        keep = a < b
        a, b = a[keep], b[keep]
        far = dom.distance(pts[a], pts[b]) > excl
        rows.append(a[far])
        cols.append(b[far])
        dists.append(dist[a[far] - start, b[far]])
    a = np.concatenate(rows)
    b = np.concatenate(cols)
    dd = np.concatenate(dists)
    order = np.lexsort((b, a, dd))
    return pts, np.stack([a[order], b[order]], axis=1), dd[order], h


def batch_refine(f: ParametricImmersion, P, Q, iters: int = 25, max_step: float = 0.5):
    """Vectorized Gauss-Newton on ``h(p) - e^{i phi} h(q)`` for many torus
    pairs at once; minimum-norm steps (pseudo-inverse) as in ``refine_pair``.

    Returns ``(P, Q, residual norms)``.
    """
    d = f.domain.d
    P = np.array(P, dtype=float)
    Q = np.array(Q, dtype=float)
    eye = np.eye(d)
    hp, hq = f(P), f(Q)
    phi = np.angle(np.sum(np.conj(hq) * hp, axis=-1))
    for _ in range(iters):
        rot = np.exp(1j * phi)[:, None]
        res = hp - rot * hq
        cols = [f.directional(P, np.broadcast_to(eye[i], P.shape)) for i in range(d)]
        cols += [-rot * f.directional(Q, np.broadcast_to(eye[i], Q.shape)) for i in range(d)]
        cols.append(-1j * rot * hq)
        J = np.stack(cols, axis=-1)
        J = np.concatenate([J.real, J.imag], axis=1)
        r = np.concatenate([res.real, res.imag], axis=1)
        step = -np.einsum("nij,nj->ni", np.linalg.pinv(J, rcond=1e-10), r)
        norm = np.linalg.norm(step, axis=1, keepdims=True)
        step *= np.minimum(1.0, max_step / np.maximum(norm, 1e-300))
        P = np.mod(P + step[:, :d], TWO_PI)
        Q = np.mod(Q + step[:, d: 2 * d], TWO_PI)
        phi = phi + step[:, -1]
        hp, hq = f(P), f(Q)
    res = np.linalg.norm(hp - np.exp(1j * phi)[:, None] * hq, axis=-1)
    return P, Q, res


def _bin_pairs(P, Q, cell: float):
    """One representative per (unordered) pair cell of size ``cell``."""
    first = np.array([tuple(p) <= tuple(q) for p, q in zip(np.round(P, 9), np.round(Q, 9))])
    A = np.where(first[:, None], P, Q)
    B = np.where(first[:, None], Q, P)
    keys = np.floor(np.concatenate([A, B], axis=1) / cell).astype(np.int64)
    _, idx = np.unique(keys, axis=0, return_index=True)
    idx.sort()
    return A[idx], B[idx]


def _projective_distance_pairs(hp, hq) -> np.ndarray:
    ip = np.abs(np.sum(np.conj(hp) * hq, axis=-1))
    return np.sqrt(np.clip(1.0 - ip ** 2, 0.0, None))


def _nullity(sv: np.ndarray, tol: Tolerances) -> int:
    return int(np.sum(sv < tol.rank_tol * max(1.0, sv[0])))


def transversality(f: ParametricImmersion, p, q, phi: Optional[float] = None) -> float:
    """Smallest singular value of the two horizontal tangent images at a
    double point, written in one representative."""
    hp, hq = f(p), f(q)
    if phi is None:
        phi = float(np.angle(np.vdot(hq, hp)))
    _, vp = _tangent_frames(f, p)
    _, vq = _tangent_frames(f, q)
    vq = np.exp(1j * phi) * vq
    vecs = np.concatenate([vp, vq], axis=0)
    horiz = vecs - np.outer(vecs @ np.conj(hp), hp)
    real = np.concatenate([horiz.real, horiz.imag], axis=1)
    return float(np.linalg.svd(real, compute_uv=False)[-1])


def _lex_key(x) -> tuple:
    return tuple(np.round(np.asarray(x, dtype=float), 9))


def find_double_points(
    f: ParametricImmersion,
    grid_density: int = 32,
    tol: Tolerances = DEFAULT,
    seed: int = 0,
    detail: bool = False,
    max_candidates: int = 20000,
):
    """Search a parameter grid for double points and refine them.

    Candidate pairs are refined greedily in order of image distance,
    skipping candidates close to a pair that has already been refined.
    Refined pairs within a linking radius form components; the null space
    of the residual Jacobian decides whether a component is an isolated
    point, a circle family or a higher-dimensional sheet. On the torus,
    more than ``max_candidates`` seeds are first converged in one batch and
    thinned to one per cell.
    """
    if grid_density < 8:
        raise ValueError("grid_density must be at least 8")
    dom = f.domain
    pts, pairs, _, h = candidate_pairs(f, grid_density, seed)
    excl = 4.0 * h * math.sqrt(dom.d)
    P, Q = pts[pairs[:, 0]], pts[pairs[:, 1]]
    skip = 2.0 * h * math.sqrt(dom.d)
    if dom.kind == "torus" and len(P) > max_candidates:
        # too many seeds for one-at-a-time refinement: converge them all at
        # once, keep the converged off-diagonal ones, one per cell
        P, Q, res = batch_refine(f, P, Q)
        ok = (res < 1e-8) & (dom.distance(P, Q) > excl)
        P, Q, res = P[ok], Q[ok], res[ok]
        order = np.argsort(res, kind="stable")
        P, Q = _bin_pairs(P[order], Q[order], 0.5 * skip)
    link = 3.0 * skip
    sols: list[Solution] = []
    vis_p: list = []
    vis_q: list = []
    failures = []
    for cand in zip(P, Q):
        if np.any(_pair_metric_many(dom, cand[0], cand[1], vis_p, vis_q) < skip):
            continue
        sol = refine_pair(f, cand[0], cand[1], tol)
        vis_p += [sol.p, cand[0]]
        vis_q += [sol.q, cand[1]]
        if sol.residual > tol.dp_tol:
            failures.append({"start": [cand[0].tolist(), cand[1].tolist()], "residual": sol.residual})
            continue
        if dom.distance(sol.p, sol.q) < excl:
            continue
        if any(pair_metric(dom, (sol.p, sol.q), (s.p, s.q)) < 1e-7 for s in sols):
            continue
        sols.append(sol)

    # connected components by union-find over the pair metric
    parent = list(range(len(sols)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    # a solution with trivial null space is locally unique, so only
    # solutions that both admit a null direction can belong to one family
    flat = [_nullity(s.singular, tol) > 0 for s in sols]
    for i in range(len(sols)):
        for j in range(i + 1, len(sols)):
            if flat[i] and flat[j] and pair_metric(dom, (sols[i].p, sols[i].q), (sols[j].p, sols[j].q)) < link:
                parent[find(i)] = find(j)
    comps: dict = {}
    for i in range(len(sols)):
        comps.setdefault(find(i), []).append(i)

    records = []
    for members in comps.values():
        members.sort(key=lambda i: _lex_key(min(_lex_key(sols[i].p), _lex_key(sols[i].q))))
        oriented = _orient(dom, [sols[i] for i in members], link)
        nullity = max(_nullity(sols[i].singular, tol) for i in members)
        root = oriented[0]
        if nullity == 0 and len(members) == 1:
            kind = ISOLATED
        elif nullity <= 1:
            kind = CIRCLE
        else:
            kind = SHEET
        hp, hq = f(root[0]), f(root[1])
        rec = DoublePointRecord(
            p=root[0], q=root[1], image_distance=phase_distance(hp, hq), kind=kind,
            samples=oriented if kind != ISOLATED else [], nullity=nullity,
        )
        if kind == ISOLATED:
            sv = transversality(f, root[0], root[1])
            rec.min_singular = sv
            rec.transverse = sv > tol.rank_tol
        records.append(rec)
    records.sort(key=lambda r: (_lex_key(r.p), _lex_key(r.q)))
    if detail:
        return SearchResult(records, failures, len(pairs))
    return records


def _orient(dom, members: list[Solution], link: float) -> list[tuple]:
    """Order each pair so neighbouring samples match p with p (BFS)."""
    first = members[0]
    root = (first.p, first.q) if _lex_key(first.p) <= _lex_key(first.q) else (first.q, first.p)
    out = {0: root}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        p, q = out[i]
        for j, m in enumerate(members):
            if j in out:
                continue
            if pair_metric(dom, (p, q), (m.p, m.q)) >= link:
                continue
            straight = dom.distance(p, m.p) + dom.distance(q, m.q)
            swapped = dom.distance(p, m.q) + dom.distance(q, m.p)
            out[j] = (m.p, m.q) if straight <= swapped else (m.q, m.p)
            queue.append(j)
    for j, m in enumerate(members):  # not reached by BFS; keep as is
        out.setdefault(j, (m.p, m.q))
    return [out[j] for j in range(len(members))]


@dataclass
class SeparationReport:
    index: int
    kind: str
    separations: list
    min_distance_from_zero: float
    passed: bool


def check_condition2(
    f: ParametricImmersion, dps: list, tol: Tolerances = DEFAULT, family_points: int = 8
) -> list[SeparationReport]:
    """Separation of every double point mod 2 pi; fails when it is within
    ``sep_margin`` of 0. Families are checked at up to ``family_points``
    evenly spaced samples."""
    out = []
    for i, rec in enumerate(dps):
        if rec.kind == ISOLATED or not rec.samples:
            pairs = [(rec.p, rec.q)]
        else:
            idx = np.unique(np.linspace(0, len(rec.samples) - 1, min(family_points, len(rec.samples))).astype(int))
            pairs = [rec.samples[k] for k in idx]
        seps = [separation(f, p, q, tol) for p, q in pairs]
        rec.separation = seps[0]
        gap = min(float(circular_distance(s, 0.0)) for s in seps)
        out.append(SeparationReport(i, rec.kind, seps, gap, gap > tol.sep_margin))
    return out


def check_multiple_point(f: ParametricImmersion, preimages: list, tol: Tolerances = DEFAULT) -> tuple[list, bool]:
    """For k preimages of one image point, the k-1 separations from the
    first must be nonzero and pairwise distinct mod 2 pi."""
    base = preimages[0]
    seps = [separation(f, base, q, tol) for q in preimages[1:]]
    ok = all(circular_distance(s, 0.0) > tol.sep_margin for s in seps)
    for i in range(len(seps)):
        for j in range(i + 1, len(seps)):
            ok = ok and circular_distance(seps[i], seps[j]) > tol.sep_margin
    return seps, ok


def count_preimages(
    f: ParametricImmersion, x, grid_density: int = 32, tol: Tolerances = DEFAULT, seed: int = 0
) -> list[np.ndarray]:
    """All parameters with the same image as x, x itself included."""
    dom = f.domain
    x = dom.retract(np.asarray(x, dtype=float))
    pts = dom.grid(grid_density, seed)
    h = dom.spacing(grid_density)
    thr = _lipschitz(f, pts) * h * math.sqrt(dom.d)
    dist = projective_distance(f(pts), f(x)[None, :])
    found = [x]
    for k in np.argsort(dist):
        if dist[k] >= thr:
            break
        if any(dom.distance(pts[k], y) < 2 * h * math.sqrt(dom.d) for y in found):
            continue
        sol = refine_pair(f, pts[k], x, tol, fixed_q=True)
        if sol.residual > tol.dp_tol:
            continue
        if all(dom.distance(sol.p, y) > 1e-6 for y in found):
            found.append(sol.p)
    return found
