"""Inertial shrinking-projection solvers for split common fixed point problems.

Given ``A: E1 -> E2`` and maps ``T`` on ``E1``, ``S`` on ``E2``, the solvers
look for ``x`` with ``T x = x`` and ``S(A x) = A x``.  One iteration of the
Banach scheme reads::

    w_n = J^q(J^p x_n + theta_n J^p(x_n - x_{n-1}))
    z_n = J^q(J^p w_n - gamma_n A* J^p_E2 (I - S) A w_n)
    y_n = J^q(alpha_n J^p z_n + (1 - alpha_n) J^p T z_n)
    C_{n+1} = {u in C_n : D(y_n, u) <= D(z_n, u) <= D(w_n, u)}
    x_{n+1} = Bregman projection of x_0 onto C_{n+1}

The Hilbert, inclusion and equilibrium variants are the ``p = 2`` forms with
particular choices of ``T`` and ``S``.  ``baseline_ma`` is the non-inertial
shrinking-projection method used as the comparison baseline; it projects
``x_1`` and compares against ``x_n`` instead of the previous stage.

Iterations are numbered from ``n = 1``, which consumes ``(x_0, x_1)`` and
produces ``x_2``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .operators import FixedPointMap
from .projections import (BoxSet, ShrinkingSet, bregman_project,
                          halfspace_from_bregman_pair)
from .space import (LinearOperator, Point, SpaceSpec, bregman_distance,
                    duality_map, duality_map_inverse, norm_p)

__all__ = [
    "ScheduleError",
    "NumericalFailure",
    "Rule",
    "ScheduleSpec",
    "StoppingRule",
    "ProblemSpec",
    "IterateRecord",
    "SolverState",
    "Trace",
    "VARIANTS",
    "gamma_upper_bound",
    "schedule_case",
    "initial_state",
    "step_banach",
    "step_hilbert",
    "step_inclusion",
    "step_equilibrium",
    "step_baseline_ma",
    "run",
]

VARIANTS = ("banach", "hilbert", "inclusion", "equilibrium", "baseline_ma")


class ScheduleError(ValueError):
    """A step-size parameter left its admissible range."""


class NumericalFailure(RuntimeError):
    """An iterate became non-finite."""

    def __init__(self, n, what):
        super().__init__(f"non-finite {what} at iteration {n}")
        self.n = n


@dataclass(frozen=True)
class Rule:
    """Parameter sequence: a constant or ``(a n + b) / (c n + d)``."""

    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind == "const":
            if len(self.params) != 1:
                raise ValueError("const rule takes one value")
        elif self.kind == "rat":
            if len(self.params) != 4:
                raise ValueError("rat rule takes four coefficients a,b,c,d")
            if self.params[2] == 0 and self.params[3] == 0:
                raise ValueError("rat rule has a zero denominator")
        else:
            raise ValueError(f"unknown rule kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))

    @classmethod
    def const(cls, v) -> Rule:
        return cls("const", (v,))

    @classmethod
    def rat(cls, a, b, c, d) -> Rule:
        return cls("rat", (a, b, c, d))

    @classmethod
    def parse(cls, text: str) -> Rule:
        """Parse ``"const:v"`` or ``"rat:a,b,c,d"``; values may be fractions."""
        kind, sep, body = str(text).partition(":")
        if not sep:
            raise ValueError(f"rule {text!r} lacks a 'kind:' prefix")
        try:
            vals = tuple(float(Fraction(v.strip())) for v in body.split(","))
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"rule {text!r} has a malformed number") from None
        return cls(kind.strip(), vals)

    def __call__(self, n: int) -> float:
        if self.kind == "const":
            return self.params[0]
        a, b, c, d = self.params
        den = c * n + d
        if den == 0:
            raise ScheduleError(f"rule {self} has a zero denominator at n={n}")
        return (a * n + b) / den

    def __str__(self):
        return f"{self.kind}:" + ",".join(repr(v) for v in self.params)


@dataclass(frozen=True)
class ScheduleSpec:
    """Sequences ``gamma_n`` (step), ``alpha_n`` (relaxation), ``theta_n`` (inertia).

    ``alpha_bounds`` is the ``[a, b]`` that must contain every ``alpha_n``
    (default: the open interval (0, 1)); ``theta_bound`` bounds ``|theta_n|``.
    """

    gamma: Rule
    alpha: Rule
    theta: Rule = Rule.const(0.0)
    alpha_bounds: tuple | None = None
    theta_bound: float | None = None

    def __post_init__(self):
        if self.alpha_bounds is not None:
            a, b = (float(v) for v in self.alpha_bounds)
            if not 0.0 < a <= b < 1.0:
                raise ScheduleError(f"alpha bounds [{a}, {b}] must lie inside (0, 1)")
            object.__setattr__(self, "alpha_bounds", (a, b))

    def values(self, n: int) -> tuple:
        return self.gamma(n), self.alpha(n), self.theta(n)

    def validate(self, n: int, gamma_max: float) -> tuple:
        """Return ``(gamma_n, alpha_n, theta_n)`` or raise :class:`ScheduleError`."""
        g, a, t = self.values(n)
        if not 0.0 < g < gamma_max:
            raise ScheduleError(
                f"gamma_{n} = {g!r} is outside (0, {gamma_max!r})")
        if self.alpha_bounds is None:
            if not 0.0 < a < 1.0:
                raise ScheduleError(f"alpha_{n} = {a!r} is outside (0, 1)")
        else:
            lo, hi = self.alpha_bounds
            if not lo <= a <= hi:
                raise ScheduleError(f"alpha_{n} = {a!r} is outside [{lo}, {hi}]")
        if not math.isfinite(t):
            raise ScheduleError(f"theta_{n} is not finite")
        if self.theta_bound is not None and abs(t) > self.theta_bound:
            raise ScheduleError(
                f"|theta_{n}| = {abs(t)!r} exceeds the bound {self.theta_bound}")
        if abs(t) > 1.0:
            warnings.warn(f"|theta_{n}| = {abs(t):g} > 1; convergence is not guaranteed",
                          RuntimeWarning, stacklevel=3)
        return g, a, t


_CASES = {
    1: (Rule.const(1), Rule.rat(0, 1, 0, 7), Rule.rat(0, 1, 0, 2)),
    2: (Rule.rat(2, 3, 2, 0), Rule.rat(0, 1, 0, 7), Rule.rat(0, 1, 0, 2)),
    3: (Rule.rat(2, 3, 2, 0), Rule.rat(1, 0, 7, 5), Rule.rat(0, 1, 0, 2)),
    4: (Rule.rat(2, 3, 2, 0), Rule.rat(1, 0, 7, 5), Rule.rat(2, 1, 10, 2)),
}

# The benchmark tables for constant inertia were generated with theta = 1/5;
# theta = 1/2 does not reproduce them.
TABULATED_THETA = Rule.rat(0, 1, 0, 5)


def schedule_case(case: int, as_tabulated: bool = False) -> ScheduleSpec:
    """Step-size Cases 1-4 of the numerical study.

    ========  ==============  ===========  =================
    case      gamma_n         alpha_n      theta_n
    ========  ==============  ===========  =================
    1         1               1/7          1/2
    2         (2n+3)/(2n)     1/7          1/2
    3         (2n+3)/(2n)     n/(7n+5)     1/2
    4         (2n+3)/(2n)     n/(7n+5)     (2n+1)/(10n+2)
    ========  ==============  ===========  =================

    With ``as_tabulated=True`` the constant ``theta_n = 1/2`` of cases 1-3 is
    replaced by ``1/5``, the value under which the tabulated iterates are
    regenerated exactly.
    """
    try:
        gamma, alpha, theta = _CASES[int(case)]
    except (KeyError, ValueError, TypeError):
        raise ValueError(f"unknown schedule case {case!r}; expected 1-4") from None
    if as_tabulated and case != 4:
        theta = TABULATED_THETA
    return ScheduleSpec(gamma, alpha, theta)


@dataclass(frozen=True)
class StoppingRule:
    """Iteration budget plus optional step and residual tolerances (0 = off)."""

    max_iter: int = 25
    step_tol: float = 0.0
    residual_tol: float = 0.0

    def __post_init__(self):
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter!r}")
        if self.step_tol < 0 or self.residual_tol < 0:
            raise ValueError("tolerances must be nonnegative")


@dataclass(frozen=True)
class ProblemSpec:
    """A split common fixed point problem together with its solver settings.

    ``x_star`` is an optional known solution used only for diagnostics.
    ``baseline_k`` is the smoothness constant ``k`` in the baseline's step
    bound ``gamma < 1/(||A||^2 k^2)``.
    """

    space1: SpaceSpec
    space2: SpaceSpec
    A: LinearOperator
    T: FixedPointMap
    S: FixedPointMap
    x0: Point
    x1: Point
    schedule: ScheduleSpec
    base_set: BoxSet | None = None
    stop: StoppingRule = StoppingRule()
    variant: str = "banach"
    x_star: Point | None = None
    baseline_k: float = 1.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.A.domain != self.space1 or self.A.codomain != self.space2:
            raise ValueError("operator does not map space1 into space2")
        if self.base_set is None:
            object.__setattr__(self, "base_set", BoxSet.whole(self.space1.dim))
        if self.base_set.dim != self.space1.dim:
            raise ValueError("base set dimension differs from space1")
        for name in ("x0", "x1", "x_star"):
            pt = getattr(self, name)
            if pt is None:
                continue
            if pt.space != self.space1:
                raise ValueError(f"{name} is not a point of space1")
        for name in ("x0", "x1"):
            if not self.base_set.contains(getattr(self, name)):
                raise ValueError(f"{name} lies outside the base set")
        if self.variant != "banach" and self.variant != "baseline_ma":
            if not (self.space1.is_hilbert and self.space2.is_hilbert):
                raise ValueError(f"variant {self.variant!r} needs p = 2 on both spaces")
        if not self.baseline_k > 0:
            raise ValueError("baseline_k must be positive")

    def gamma_max(self) -> float:
        if self.variant == "baseline_ma":
            nrm = self.A.norm_upper_bound
            return math.inf if nrm == 0 else 1.0 / (nrm ** 2 * self.baseline_k ** 2)
        return gamma_upper_bound(self.space1, self.A)

    def validate_schedule(self) -> None:
        """Check every parameter value the stopping rule can reach."""
        gmax = self.gamma_max()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            for n in range(1, self.stop.max_iter + 1):
                self.schedule.validate(n, gmax)


def gamma_upper_bound(space: SpaceSpec, A: LinearOperator) -> float:
    """Supremum ``(q / (C_q ||A||^q))^(1/(q-1))`` of admissible step sizes.

    ``space`` supplies ``q`` and ``C_q`` (the dual of the domain space);
    a zero operator gives ``inf``.
    """
    nrm = A.norm_upper_bound
    if nrm == 0:
        return math.inf
    q, cq = space.q, space.smoothness_const
    return (q / (cq * nrm ** q)) ** (1.0 / (q - 1.0))


@dataclass(frozen=True)
class IterateRecord:
    """Snapshot of iteration ``n``.

    ``bregman_from_x0`` is ``D(anchor, x_{n+1})`` where the anchor is ``x_0``
    (``x_1`` for the baseline); it is nondecreasing along a run.
    """

    n: int
    w: Point
    z: Point
    y: Point
    x_next: Point
    residual_S: float
    residual_T: float
    step_norm: float
    bregman_from_x0: float


@dataclass
class SolverState:
    problem: ProblemSpec
    x_prev: Point
    x: Point
    anchor: Point
    C: ShrinkingSet
    tol: float | None = None


def initial_state(problem: ProblemSpec, tol: float | None = None) -> SolverState:
    anchor = problem.x1 if problem.variant == "baseline_ma" else problem.x0
    return SolverState(problem, problem.x0, problem.x1, anchor,
                       ShrinkingSet(problem.base_set), tol)


def _finish(state, n, w, z, y, res_s, tz, near_far):
    """Append the two half-spaces, project, advance the state."""
    for name, pt in (("w", w), ("z", z), ("y", y)):
        if not np.all(np.isfinite(pt.coords)):
            raise NumericalFailure(n, name)
    state.C.append(*(halfspace_from_bregman_pair(a, b) for a, b in near_far))
    x_next = bregman_project(state.C, state.anchor, state.tol)
    if not np.all(np.isfinite(x_next.coords)):
        raise NumericalFailure(n, "x_next")
    rec = IterateRecord(
        n=n, w=w, z=z, y=y, x_next=x_next,
        residual_S=res_s,
        residual_T=norm_p(tz - z),
        step_norm=norm_p(x_next - state.x),
        bregman_from_x0=bregman_distance(state.anchor, x_next),
    )
    state.x_prev, state.x = state.x, x_next
    return rec


def step_banach(state: SolverState, n: int) -> IterateRecord:
    """One iteration of the inertial scheme in l_p spaces."""
    pb = state.problem
    gamma, alpha, theta = pb.schedule.validate(n, pb.gamma_max())
    jx = duality_map(state.x)
    w = duality_map_inverse(jx + theta * duality_map(state.x - state.x_prev))
    aw = pb.A(w)
    resid = aw - pb.S(aw)
    z = duality_map_inverse(duality_map(w) - gamma * pb.A.adjoint(duality_map(resid)))
    tz = pb.T(z)
    y = duality_map_inverse(alpha * duality_map(z) + (1.0 - alpha) * duality_map(tz))
    return _finish(state, n, w, z, y, norm_p(resid), tz, ((y, z), (z, w)))


def _hilbert_core(state, n, S, project_z):
    pb = state.problem
    gamma, alpha, theta = pb.schedule.validate(n, pb.gamma_max())
    x, xp = state.x.coords, state.x_prev.coords
    sp1 = pb.space1
    w = Point._wrap(x + theta * (x - xp), sp1)
    aw = pb.A.matrix @ w.coords
    resid = aw - S.fn(aw)
    zc = w.coords - gamma * (pb.A.matrix.T @ resid)
    if project_z:
        zc = pb.base_set.clip(zc)
    z = Point._wrap(zc, sp1)
    tz = pb.T(z)
    y = Point._wrap(alpha * z.coords + (1.0 - alpha) * tz.coords, sp1)
    return _finish(state, n, w, z, y, float(np.linalg.norm(resid)), tz,
                   ((y, z), (z, w)))


def step_hilbert(state: SolverState, n: int) -> IterateRecord:
    """Hilbert-space form: duality maps are identities, projections metric."""
    return _hilbert_core(state, n, state.problem.S, project_z=False)


def step_inclusion(state: SolverState, n: int) -> IterateRecord:
    """Split fixed point / variational inclusion form.

    The problem's ``S`` is the resolvent of ``B`` and its ``T`` the
    composition of the fixed-point map with the resolvent of ``K``
    (see :func:`scfp.problems.inclusion_problem`).
    """
    return _hilbert_core(state, n, state.problem.S, project_z=False)


def step_equilibrium(state: SolverState, n: int) -> IterateRecord:
    """Split fixed point / equilibrium form; ``z_n`` is projected onto the base set."""
    return _hilbert_core(state, n, state.problem.S, project_z=True)


def step_baseline_ma(state: SolverState, n: int) -> IterateRecord:
    """One iteration of the non-inertial baseline.

    ``z_n = J^q(J^p x_n - gamma A* J^p (I - S) A x_n)``,
    ``y_n = J^q(alpha J^p z_n + (1 - alpha) J^p T z_n)``, the new half-spaces
    keep ``u`` at least as close to ``y_n`` and to ``z_n`` as to ``x_n``, and
    ``x_1`` is projected.
    """
    pb = state.problem
    gamma, alpha, _ = pb.schedule.validate(n, pb.gamma_max())
    x = state.x
    ax = pb.A(x)
    resid = ax - pb.S(ax)
    z = duality_map_inverse(duality_map(x) - gamma * pb.A.adjoint(duality_map(resid)))
    tz = pb.T(z)
    y = duality_map_inverse(alpha * duality_map(z) + (1.0 - alpha) * duality_map(tz))
    return _finish(state, n, x, z, y, norm_p(resid), tz, ((y, x), (z, x)))


STEPPERS = {
    "banach": step_banach,
    "hilbert": step_hilbert,
    "inclusion": step_inclusion,
    "equilibrium": step_equilibrium,
    "baseline_ma": step_baseline_ma,
}


@dataclass
class Trace:
    """Full history of a run.

    ``records[k]`` is iteration ``n = k + 1`` and holds ``x_{n+1}``.
    ``shrinking_set`` is the final accumulated set; its first ``2 n``
    half-spaces describe ``C_{n+1}``.
    """

    problem: ProblemSpec
    records: list = field(default_factory=list)
    reason: str = ""
    shrinking_set: ShrinkingSet | None = None

    @property
    def first_index(self) -> int:
        return 1 if self.problem.variant == "baseline_ma" else 0

    def iterates(self) -> dict:
        """Map ``n -> x_n`` from the first meaningful index on."""
        xs = {}
        if self.first_index == 0:
            xs[0] = self.problem.x0
        xs[1] = self.problem.x1
        for rec in self.records:
            xs[rec.n + 1] = rec.x_next
        return xs

    @property
    def final(self) -> Point:
        return self.records[-1].x_next if self.records else self.problem.x1


def run(problem: ProblemSpec, tol: float | None = None) -> Trace:
    """Iterate the problem's variant until its stopping rule fires.

    ``tol`` is passed to every projection.  Deterministic for a given problem.
    """
    problem.validate_schedule()
    step = STEPPERS[problem.variant]
    state = initial_state(problem, tol)
    trace = Trace(problem, shrinking_set=state.C)
    stop = problem.stop
    trace.reason = "max_iter"
    for n in range(1, stop.max_iter + 1):
        rec = step(state, n)
        trace.records.append(rec)
        if stop.step_tol > 0 and rec.step_norm <= stop.step_tol:
            trace.reason = "step_tol"
            break
        if (stop.residual_tol > 0 and rec.residual_S <= stop.residual_tol
                and rec.residual_T <= stop.residual_tol):
            trace.reason = "residual_tol"
            break
    return trace
