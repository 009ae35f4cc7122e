"""Seeded property suites behind ``scfp check``.

Each suite returns a list of :class:`CheckResult`.  Sampling can only
falsify a property; a pass means no violation was found.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .operators import (FixedPointMap, MonotoneLinearOp,
                        check_bregman_quasi_nonexpansive,
                        check_firmly_nonexpansive_like, equilibrium_resolvent,
                        projection_map, resolvent_linear, scaling_map)
from .problems import random_hilbert_problem, study_problem
from .projections import BoxSet
from .solvers import Trace, run, schedule_case
from .space import (Point, SpaceSpec, bregman_distance, dual_norm, duality_map,
                    duality_map_inverse, norm_p, pairing)

__all__ = ["CheckResult", "geometry_suite", "operators_suite", "solver_suite",
           "verify_trace", "trajectory_gap", "SUITES"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name}  (worst {self.worst:.3e}) {self.detail}".rstrip()


def _rand_point(rng, space, scale=1.0):
    return Point(rng.normal(scale=scale, size=space.dim), space)


def _spaces(rng):
    return SpaceSpec(int(rng.integers(1, 4)), float(rng.choice([2.0, 3.0, 4.0])))


def geometry_suite(seed: int = 0, n: int = 1000) -> list:
    """Duality-map and Bregman-distance identities on seeded samples."""
    rng = np.random.default_rng(seed)
    worst = {k: 0.0 for k in ("pairing", "dual_norm", "round_trip", "three_point",
                              "symmetrized", "nonneg", "upper", "hilbert", "smooth",
                              "dual_convex")}
    for _ in range(n):
        sp = _spaces(rng)
        x, y, z = (_rand_point(rng, sp) for _ in range(3))
        jx, jy, jz = duality_map(x), duality_map(y), duality_map(z)
        nx = norm_p(x)
        worst["pairing"] = max(worst["pairing"],
                               abs(pairing(x, jx) - nx ** sp.p) / max(1.0, nx ** sp.p))
        worst["dual_norm"] = max(worst["dual_norm"], abs(dual_norm(jx) - nx ** (sp.p - 1))
                                 / max(1.0, nx ** (sp.p - 1)))
        worst["round_trip"] = max(worst["round_trip"], float(np.max(np.abs(
            duality_map_inverse(jx).coords - x.coords))))
        dxy, dyx = bregman_distance(x, y), bregman_distance(y, x)
        rhs = bregman_distance(x, z) + bregman_distance(z, y) + pairing(z - y, jx - jz)
        worst["three_point"] = max(worst["three_point"], abs(dxy - rhs))
        sym = pairing(x - y, jx - jy)
        worst["symmetrized"] = max(worst["symmetrized"], abs(dxy + dyx - sym))
        worst["nonneg"] = max(worst["nonneg"], -min(dxy, 0.0))
        worst["upper"] = max(worst["upper"], dxy - sym)
        h = SpaceSpec(sp.dim)
        xh, yh = Point(x.coords, h), Point(y.coords, h)
        d = x.coords - y.coords
        worst["hilbert"] = max(worst["hilbert"],
                               abs(bregman_distance(xh, yh) - 0.5 * float(d @ d)))
        lhs = float(d @ d)
        bound = float(x.coords @ x.coords) - 2 * float(y.coords @ x.coords) + float(
            y.coords @ y.coords)
        worst["smooth"] = max(worst["smooth"], lhs - bound)
        k = int(rng.integers(2, 6))
        pts = [_rand_point(rng, sp) for _ in range(k)]
        t = rng.dirichlet(np.ones(k))
        mix = duality_map_inverse(sum((ti * duality_map(pi) for ti, pi in zip(t, pts)),
                                      start=duality_map(sp.zero())))
        gap = bregman_distance(mix, z) - sum(ti * bregman_distance(pi, z)
                                             for ti, pi in zip(t, pts))
        worst["dual_convex"] = max(worst["dual_convex"], gap)
    tol = {"pairing": 1e-10, "dual_norm": 1e-10, "round_trip": 1e-10,
           "three_point": 1e-9, "symmetrized": 1e-9, "nonneg": 0.0, "upper": 1e-9,
           "hilbert": 1e-12, "smooth": 1e-9, "dual_convex": 1e-9}
    names = {"pairing": "<x, Jx> = ||x||^p", "dual_norm": "||Jx||_q = ||x||^(p-1)",
             "round_trip": "J^q J^p = id", "three_point": "three-point identity",
             "symmetrized": "D(x,y) + D(y,x) = <x-y, Jx-Jy>",
             "nonneg": "D(x,y) >= 0", "upper": "D(x,y) <= <x-y, Jx-Jy>",
             "hilbert": "D_2(x,y) = |x-y|^2/2",
             "smooth": "|x-y|^2 <= |x|^2 - 2<y,x> + |y|^2",
             "dual_convex": "D(J^q(sum t J^p x_i), x) <= sum t D(x_i, x)"}
    return [CheckResult(names[k], worst[k] <= tol[k], worst[k]) for k in worst]


def _firm_worst(T, space, domain, n, rng):
    worst = np.inf
    lo = np.where(np.isfinite(domain.lower), domain.lower, -10.0)
    hi = np.where(np.isfinite(domain.upper), domain.upper, 10.0)
    for _ in range(n):
        x = Point(rng.uniform(lo, hi), space)
        y = Point(rng.uniform(lo, hi), space)
        tx, ty = T(x).coords, T(y).coords
        d = tx - ty
        worst = min(worst, float(d @ (x.coords - y.coords)) - float(d @ d))
    return worst


def operators_suite(seed: int = 0, n: int = 1000) -> list:
    """Defining inequalities of the provided maps."""
    rng = np.random.default_rng(seed)
    out = []
    s1_4 = SpaceSpec(1, 4.0)
    rep = check_firmly_nonexpansive_like(scaling_map(0.25), s1_4, BoxSet([-10], [10]),
                                         n, seed)
    out.append(CheckResult("x/4 firmly nonexpansive-like on [-10,10], p=4",
                           rep.passed, rep.worst_value))
    Q = BoxSet([0.0, -np.inf], [np.inf, 0.0])
    rep = check_firmly_nonexpansive_like(projection_map(Q), SpaceSpec(2), Q.__class__(
        [-10, -10], [10, 10]), n, seed)
    out.append(CheckResult("P_Q firmly nonexpansive-like, p=2", rep.passed, rep.worst_value))
    rep = check_bregman_quasi_nonexpansive(scaling_map(0.25), SpaceSpec(1).zero(),
                                           SpaceSpec(1), BoxSet([-10], [10]), n, seed)
    out.append(CheckResult("x/4 left Bregman quasi-nonexpansive", rep.passed,
                           rep.worst_value))
    neg = FixedPointMap(lambda x: -x)
    rep = check_firmly_nonexpansive_like(neg, SpaceSpec(1), BoxSet([-1], [1]), n, seed)
    out.append(CheckResult("x -> -x is rejected", not rep.passed, rep.worst_value))

    worst_res, worst_eq = np.inf, np.inf
    for _ in range(20):
        d = int(rng.integers(1, 4))
        G = rng.normal(size=(d, d))
        M = G @ G.T * 0.5 + (G - G.T)  # PSD symmetric part plus skew part
        B = MonotoneLinearOp(M, rng.normal(size=d))
        sp = SpaceSpec(d)
        box = BoxSet(-5 * np.ones(d), 5 * np.ones(d))
        worst_res = min(worst_res, _firm_worst(resolvent_linear(B, rng.uniform(0.1, 2)),
                                               sp, box, n // 20, rng))
        C = BoxSet(-np.abs(rng.normal(size=d)), np.abs(rng.normal(size=d)))
        worst_eq = min(worst_eq, _firm_worst(equilibrium_resolvent(B, C, rng.uniform(0.1, 2)),
                                             sp, box, n // 20, rng))
    out.append(CheckResult("resolvent firmly nonexpansive", worst_res >= -1e-10, -worst_res))
    out.append(CheckResult("T_r^F firmly nonexpansive", worst_eq >= -1e-10, -worst_eq))

    # fixed-point sets are convex: midpoints of fixed points stay fixed
    sp2 = SpaceSpec(2)
    P = projection_map(Q)
    worst_fix = 0.0
    for _ in range(n // 10):
        a = Q.clip(rng.normal(size=2) * 3)
        b = Q.clip(rng.normal(size=2) * 3)
        t = rng.uniform()
        m = Point(t * a + (1 - t) * b, sp2)
        worst_fix = max(worst_fix, float(np.max(np.abs(P(m).coords - m.coords))))
    M = np.array([[1.0, 1.0], [1.0, 1.0]])
    B = MonotoneLinearOp(M, np.zeros(2))
    R = resolvent_linear(B, 0.7)
    for _ in range(n // 10):
        # null space of M is spanned by (1, -1)
        a, b = rng.normal(size=2)
        t = rng.uniform()
        m = Point((t * a + (1 - t) * b) * np.array([1.0, -1.0]), sp2)
        worst_fix = max(worst_fix, float(np.max(np.abs(R(m).coords - m.coords))))
    out.append(CheckResult("fixed-point sets closed under convex combination",
                           worst_fix <= 1e-10, worst_fix))
    return out


def verify_trace(trace: Trace, x_star: Point | None = None) -> dict:
    """Invariants of a completed run at a known solution.

    Returns the minimum slack of ``x_star`` over the accumulated constraints,
    the largest decrease of ``D(anchor, x_{n+1})``, and the largest violation
    of ``D(y,x*) <= D(z,x*) <= D(w,x*)`` (inertial variants only).
    """
    if x_star is None:
        x_star = trace.problem.x_star
    out = {"feasibility_slack": np.inf, "monotone_drop": 0.0, "descent_chain": 0.0}
    if x_star is not None:
        out["feasibility_slack"] = trace.shrinking_set.min_slack(x_star)
    prev = None
    for rec in trace.records:
        if prev is not None:
            out["monotone_drop"] = max(out["monotone_drop"], prev - rec.bregman_from_x0)
        prev = rec.bregman_from_x0
        if x_star is not None and trace.problem.variant != "baseline_ma":
            dy = bregman_distance(rec.y, x_star)
            dz = bregman_distance(rec.z, x_star)
            dw = bregman_distance(rec.w, x_star)
            out["descent_chain"] = max(out["descent_chain"], dy - dz, dz - dw)
    return out


def trajectory_gap(a: Trace, b: Trace) -> float:
    """Largest coordinate difference between two runs' iterates and internals."""
    if len(a.records) != len(b.records):
        return np.inf
    gap = 0.0
    for ra, rb in zip(a.records, b.records):
        for name in ("w", "z", "y", "x_next"):
            gap = max(gap, float(np.max(np.abs(getattr(ra, name).coords
                                               - getattr(rb, name).coords))))
    return gap


def solver_suite(seed: int = 0, n: int = 20) -> list:
    """Run-level invariants on the numerical-study problem and seeded problems."""
    out = []
    study = [study_problem(6, 6), study_problem(3, 3)]
    study += [study_problem(8, 6, schedule_case(k, True)) for k in (1, 2, 3, 4)]
    study += [study_problem(8, 6, schedule_case(k)) for k in (1, 4)]
    feas, drop, chain = np.inf, 0.0, 0.0
    for pb in study:
        v = verify_trace(run(pb))
        feas = min(feas, v["feasibility_slack"])
        drop = max(drop, v["monotone_drop"])
        chain = max(chain, v["descent_chain"])
    out.append(CheckResult("x* = 0 stays in every C_n", feas >= -1e-9, -feas))
    out.append(CheckResult("D(x0, x_n) nondecreasing", drop <= 1e-10, drop))
    out.append(CheckResult("D(y,x*) <= D(z,x*) <= D(w,x*)", chain <= 1e-9, chain))

    gap = 0.0
    rng = np.random.default_rng(seed)
    for _ in range(n):
        pb = random_hilbert_problem(int(rng.integers(2 ** 31)))
        gap = max(gap, trajectory_gap(run(replace(pb, variant="banach")),
                                      run(replace(pb, variant="hilbert"))))
    out.append(CheckResult("Banach stepper at p=2 equals Hilbert stepper", gap <= 1e-12, gap))
    return out


SUITES = {"geometry": geometry_suite, "operators": operators_suite, "solver": solver_suite}
