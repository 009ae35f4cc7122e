"""Metric projections onto boxes and Bregman projections onto polyhedra."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, lsq_linear

from .space import (DualPoint, Point, SpaceSpec, bregman_distance,
                    duality_map, norm_p)

__all__ = [
    "InfeasibleSetError",
    "HalfSpace",
    "BoxSet",
    "ShrinkingSet",
    "metric_project_box",
    "halfspace_from_bregman_pair",
    "bregman_project",
    "default_tol",
]


class InfeasibleSetError(RuntimeError):
    """The constraint set of a projection is empty.

    Inside a shrinking-projection run this means either the problem has no
    solution or round-off has collapsed the accumulated set.
    """


@dataclass(frozen=True)
class HalfSpace:
    """``{u : <normal, u> <= offset}``."""

    normal: DualPoint
    offset: float

    def __post_init__(self):
        if not math.isfinite(self.offset):
            raise ValueError("half-space offset must be finite")
        if not np.any(self.normal.coords) and self.offset < 0:
            raise InfeasibleSetError(
                f"degenerate half-space 0 <= {self.offset} is empty")

    @property
    def is_trivial(self) -> bool:
        return not np.any(self.normal.coords)

    def slack(self, u) -> float:
        """``offset - <normal, u>``; nonnegative inside."""
        return self.offset - float(np.dot(self.normal.coords, _coords(u)))

    def contains(self, u, tol: float = 0.0) -> bool:
        return self.slack(u) >= -tol


@dataclass(frozen=True)
class BoxSet:
    """Product of closed intervals; infinite bounds allowed."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float).reshape(-1)
        hi = np.array(self.upper, dtype=float).reshape(-1)
        if lo.shape != hi.shape:
            raise ValueError("lower and upper bounds differ in length")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("box bounds must not be NaN")
        if np.any(lo > hi):
            raise ValueError(f"empty box: lower {lo} exceeds upper {hi}")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def whole(cls, dim: int) -> BoxSet:
        return cls(np.full(dim, -np.inf), np.full(dim, np.inf))

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def is_whole(self) -> bool:
        return bool(np.all(np.isneginf(self.lower)) and np.all(np.isposinf(self.upper)))

    def contains(self, u, tol: float = 0.0) -> bool:
        c = _coords(u)
        return bool(np.all(c >= self.lower - tol) and np.all(c <= self.upper + tol))

    def clip(self, arr: np.ndarray) -> np.ndarray:
        return np.minimum(np.maximum(arr, self.lower), self.upper)

    def __eq__(self, other):
        return (isinstance(other, BoxSet)
                and np.array_equal(self.lower, other.lower)
                and np.array_equal(self.upper, other.upper))

    def __hash__(self):
        return hash((self.lower.tobytes(), self.upper.tobytes()))


def _coords(u):
    return u.coords if isinstance(u, (Point, DualPoint)) else np.asarray(u, dtype=float)


@dataclass
class ShrinkingSet:
    """``base`` intersected with an append-only list of half-spaces."""

    base: BoxSet
    halfspaces: list = field(default_factory=list)

    def append(self, *hs: HalfSpace) -> None:
        self.halfspaces.extend(hs)

    def contains(self, u, tol: float = 0.0) -> bool:
        return self.base.contains(u, tol) and all(h.contains(u, tol) for h in self.halfspaces)

    def min_slack(self, u) -> float:
        """Smallest slack over the base box faces and every half-space."""
        c = _coords(u)
        slacks = [np.min(c - self.base.lower, initial=np.inf),
                  np.min(self.base.upper - c, initial=np.inf)]
        slacks.extend(h.slack(c) for h in self.halfspaces)
        return float(min(slacks))

    def prefix(self, k: int) -> ShrinkingSet:
        """The set formed by the base and the first ``k`` half-spaces."""
        return ShrinkingSet(self.base, list(self.halfspaces[:k]))


def metric_project_box(Q: BoxSet, v: Point) -> Point:
    """Euclidean projection onto a box: componentwise clamp."""
    if Q.dim != v.space.dim:
        raise ValueError("box and point dimensions differ")
    return Point._wrap(Q.clip(v.coords), v.space)


# normals within this many ulps of the operands count as zero
_NOISE_ULPS = 64


def halfspace_from_bregman_pair(near: Point, far: Point) -> HalfSpace:
    """Half-space ``{u : D_p(near, u) <= D_p(far, u)}``.

    The ``(1/p)||u||^p`` terms cancel, leaving
    ``<J^p far - J^p near, u> <= (1/q)(||far||^p - ||near||^p)``.

    When ``J^p far - J^p near`` is at rounding level relative to its terms
    (e.g. ``near = alpha z + (1 - alpha) z`` off by one ulp from ``z``) the
    boundary orientation is noise, so the whole space is returned.  This
    only ever enlarges the set.  For ``p = 2`` in one dimension the normal
    is scaled to unit length so the offset is the midpoint itself.
    """
    if near.space != far.space:
        raise ValueError("near and far live in different spaces")
    sp = near.space
    trivial = HalfSpace(DualPoint._wrap(np.zeros(sp.dim), sp), 0.0)
    if near == far:
        return trivial
    jf, jn = duality_map(far), duality_map(near)
    a = jf - jn
    scale = max(np.abs(jf.coords).max(), np.abs(jn.coords).max())
    if np.abs(a.coords).max() <= _NOISE_ULPS * np.finfo(float).eps * scale:
        return trivial
    if sp.p == 2.0 and sp.dim == 1:
        # the bisector is the midpoint; one rounding instead of three
        s = 1.0 if a.coords[0] > 0 else -1.0
        return HalfSpace(DualPoint._wrap(np.array([s]), sp),
                         s * 0.5 * (far.coords[0] + near.coords[0]))
    if sp.p == 2.0:
        # (||f||^2 - ||n||^2)/2 = <f - n, f + n>/2 without cancellation
        b = 0.5 * float(np.dot(far.coords - near.coords, far.coords + near.coords))
    else:
        b = (norm_p(far) ** sp.p - norm_p(near) ** sp.p) / sp.q
    return HalfSpace(a, b)


def default_tol(space: SpaceSpec) -> float:
    return 1e-12 if (space.dim == 1 or space.p == 2.0) else 1e-10


def bregman_project(C: ShrinkingSet, x0: Point, tol: float | None = None,
                    method: str = "auto") -> Point:
    """Bregman projection ``argmin_{u in C} D_p(x0, u)``.

    Parameters
    ----------
    C : ShrinkingSet
        Box intersected with half-spaces.
    x0 : Point
        Point to project.
    tol : float, optional
        Feasibility / optimality tolerance; see :func:`default_tol`.
    method : {'auto', 'interval', 'ldp', 'dykstra', 'dual'}
        ``auto`` picks the closed form in dimension one, the least-distance
        NNLS solve for ``p = 2`` and dual coordinate ascent otherwise.

    Raises
    ------
    InfeasibleSetError
        If ``C`` is empty.
    """
    sp = x0.space
    if C.base.dim != sp.dim:
        raise ValueError("set and point dimensions differ")
    if tol is None:
        tol = default_tol(sp)
    if tol <= 0:
        raise ValueError("tol must be positive")
    normals, offsets = _normalized_rows(C)
    if method == "auto":
        if sp.dim == 1:
            method = "interval"
        elif sp.p == 2.0:
            method = "ldp"
        else:
            method = "dual"
    if method != "interval" and C.base.contains(x0) and (
            not len(offsets) or np.all(normals @ x0.coords <= offsets)):
        return x0
    if method == "interval":
        if sp.dim != 1:
            raise ValueError("interval method needs dimension 1")
        u = _project_interval(C.base, normals, offsets, x0.coords)
    elif method == "ldp":
        _require_hilbert(sp, method)
        u = _project_ldp(C.base, normals, offsets, x0.coords, tol)
    elif method == "dykstra":
        _require_hilbert(sp, method)
        u = _project_dykstra(C.base, normals, offsets, x0.coords, tol)
    elif method == "dual":
        u = _project_dual(C.base, normals, offsets, x0.coords, sp.p, tol)
    else:
        raise ValueError(f"unknown projection method {method!r}")
    return Point._wrap(u, sp)


def _require_hilbert(sp, method):
    if sp.p != 2.0:
        raise ValueError(f"method {method!r} needs p = 2")


def _normalized_rows(C: ShrinkingSet):
    """Stack the non-trivial half-spaces as unit-normal rows."""
    rows, rhs = [], []
    for h in C.halfspaces:
        a = h.normal.coords
        s = float(np.linalg.norm(a))
        if s == 0.0:
            continue  # offset >= 0 was checked at construction
        rows.append(a / s)
        rhs.append(h.offset / s)
    dim = C.base.dim
    return np.array(rows, dtype=float).reshape(-1, dim), np.array(rhs, dtype=float)


def _project_interval(base, normals, offsets, x0):
    lo, hi = float(base.lower[0]), float(base.upper[0])
    for a, b in zip(normals[:, 0], offsets):
        # unit normals in 1-D are exactly +1 or -1
        if a > 0:
            hi = min(hi, b / a)
        else:
            lo = max(lo, b / a)
    if lo > hi:
        raise InfeasibleSetError(f"interval [{lo!r}, {hi!r}] is empty")
    # D_p(x0, .) is convex with minimum at x0, so clamping is exact for any p
    return np.array([min(max(float(x0[0]), lo), hi)])


def _box_rows(base):
    rows, rhs = [], []
    for i in range(base.dim):
        e = np.zeros(base.dim)
        if np.isfinite(base.upper[i]):
            e[i] = 1.0
            rows.append(e.copy())
            rhs.append(base.upper[i])
        if np.isfinite(base.lower[i]):
            e[i] = -1.0
            rows.append(e.copy())
            rhs.append(-base.lower[i])
    return np.array(rows).reshape(-1, base.dim), np.array(rhs)


def _project_ldp(base, normals, offsets, x0, tol):
    """Euclidean projection via least-distance programming.

    Minimizing ``||v||`` subject to ``G v >= h`` is solved by one
    nonnegative least-squares problem (Lawson & Hanson, ch. 23); here
    ``v = u - x0``.  The bounded-variable solver is used because it
    certifies its own optimality conditions.  A result that is infeasible or
    fails the projection's KKT check falls back to Dykstra.
    """
    br, bb = _box_rows(base)
    A = np.vstack([normals, br])
    b = np.concatenate([offsets, bb])
    n = x0.shape[0]
    G = -A
    h = A @ x0 - b
    scale = max(1.0, float(np.max(np.abs(h))))
    E = np.vstack([G.T, (h / scale)[None, :]])
    f = np.zeros(n + 1)
    f[n] = 1.0
    w = lsq_linear(E, f, bounds=(0.0, np.inf), method="bvls", tol=1e-15).x
    r = E @ w - f
    if abs(r[n]) <= 1e-14 or np.linalg.norm(r) <= 1e-14:
        raise InfeasibleSetError("polyhedron is empty (least-distance problem infeasible)")
    v = -r[:n] / r[n] * scale
    u = base.clip(x0 + v)
    # multipliers of the projection: x0 - u = A^T lam, lam >= 0, lam_i = 0 off the boundary
    lam = w * scale / r[n] if r[n] < 0 else w * 0.0
    lam = np.abs(lam)
    unit = max(1.0, float(np.max(np.abs(u), initial=0.0)), float(np.max(np.abs(x0))))
    viol = float(np.max(A @ u - b, initial=0.0))
    stationarity = float(np.max(np.abs(x0 - u - A.T @ lam), initial=0.0))
    slackness = float(np.max(lam * np.abs(A @ u - b), initial=0.0))
    bound = max(tol, 1e-9) * unit
    if viol > bound or stationarity > 1e3 * bound or slackness > 1e3 * bound:
        u = _project_dykstra(base, normals, offsets, x0, tol)
    return u


def _project_dykstra(base, normals, offsets, x0, tol, max_sweeps=200_000):
    """Cyclic Dykstra over the box and each half-space (``p = 2`` only)."""
    m = normals.shape[0]
    u = x0.copy()
    inc = np.zeros((m + 1, x0.shape[0]))
    for _ in range(max_sweeps):
        u_old, inc_old = u.copy(), inc.copy()
        # box
        v = u + inc[m]
        u = base.clip(v)
        inc[m] = v - u
        for i in range(m):
            v = u + inc[i]
            excess = float(np.dot(normals[i], v)) - offsets[i]
            u = v - max(excess, 0.0) * normals[i]
            inc[i] = v - u
        # u can repeat for a sweep while the corrections still move
        change = max(float(np.max(np.abs(u - u_old))),
                     float(np.max(np.abs(inc - inc_old))))
        if change <= tol and _max_violation(base, normals, offsets, u) <= tol:
            return u
        if not np.all(np.isfinite(u)):
            break
    if _max_violation(base, normals, offsets, u) > 1e3 * tol:
        raise InfeasibleSetError("Dykstra iterates failed to reach the set")
    return u


def _max_violation(base, normals, offsets, u):
    v = np.max(normals @ u - offsets, initial=0.0)
    v = max(v, float(np.max(base.lower - u, initial=0.0)),
            float(np.max(u - base.upper, initial=0.0)))
    return float(v)


def _project_dual(base, normals, offsets, x0, p, tol, max_sweeps=20_000):
    """Bregman projection by cyclic coordinate ascent on the dual.

    With multipliers ``lam >= 0`` for the half-spaces, the Lagrangian is
    minimized coordinatewise in closed form over the box:
    ``u(lam) = clip(J^q(J^p x0 - sum lam_i a_i))``.  Each sweep maximizes the
    concave dual exactly in one multiplier at a time; ``a_i . u(lam)`` is
    nonincreasing in ``lam_i`` so the update is a bracketed root.
    """
    q = p / (p - 1.0)
    g0 = np.sign(x0) * np.abs(x0) ** (p - 1.0)

    def primal(g):
        return base.clip(np.sign(g) * np.abs(g) ** (q - 1.0))

    m = normals.shape[0]
    lam = np.zeros(m)
    g = g0.copy()
    u = primal(g)
    for _ in range(max_sweeps):
        moved = 0.0
        for i in range(m):
            a, b = normals[i], offsets[i]
            g_rest = g + lam[i] * a

            def phi(t):
                return float(np.dot(a, primal(g_rest - t * a))) - b

            if phi(0.0) <= 0.0:
                t = 0.0
            else:
                hi = max(1.0, 2.0 * lam[i])
                while phi(hi) > 0.0:
                    hi *= 2.0
                    if hi > 1e300:
                        raise InfeasibleSetError(
                            f"half-space {i} cannot be satisfied inside the box")
                t = brentq(phi, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                           maxiter=500)
            u_prev = u
            moved = max(moved, abs(t - lam[i]))
            lam[i] = t
            g = g_rest - t * a
            u = primal(g)
            moved = max(moved, float(np.max(np.abs(u - u_prev))))
        if moved <= tol and _max_violation(base, normals, offsets, u) <= tol:
            return u
    if _max_violation(base, normals, offsets, u) > 1e3 * tol:
        raise InfeasibleSetError("dual ascent did not reach a feasible point")
    return u


def project_check(C: ShrinkingSet, x0: Point, u: Point, samples, tol: float) -> dict:
    """Worst violations of the projection characterizations at ``u``.

    For each sampled ``z`` in ``C`` evaluates the variational inequality
    ``<J x0 - J u, z - u> <= 0`` and the three-point bound
    ``D(u, z) <= D(x0, z) - D(x0, u)``.
    """
    jx0, ju = duality_map(x0), duality_map(u)
    d0 = bregman_distance(x0, u)
    worst_vi = -np.inf
    worst_py = -np.inf
    for z in samples:
        zp = z if isinstance(z, Point) else Point(z, x0.space)
        worst_vi = max(worst_vi, float(np.dot(jx0.coords - ju.coords, zp.coords - u.coords)))
        worst_py = max(worst_py, bregman_distance(u, zp) - bregman_distance(x0, zp) + d0)
    return {"variational": worst_vi, "pythagoras": worst_py,
            "passed": worst_vi <= tol and worst_py <= tol}
