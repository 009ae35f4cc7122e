"""Ready-made problem instances.

The numerical study works on ``E1 = R`` and ``E2 = R^2`` with
``A x = (x/2, x/3)``, ``T x = x/4`` and ``S`` the projection onto
``Q = [0, inf) x (-inf, 0]``; the base set is ``C = [0, inf)`` and the unique
solution is ``0``.
"""
from __future__ import annotations

import numpy as np

from .operators import (FixedPointMap, MonotoneLinearOp, compose,
                        equilibrium_resolvent, identity_map, projection_map,
                        resolvent_linear, scaling_map)
from .projections import BoxSet
from .solvers import ProblemSpec, Rule, ScheduleSpec, StoppingRule, schedule_case
from .space import LinearOperator, SpaceSpec

__all__ = [
    "STUDY_MATRIX",
    "study_problem",
    "table1_columns",
    "table2_columns",
    "inclusion_problem",
    "equilibrium_problem",
    "random_hilbert_problem",
]

STUDY_MATRIX = np.array([[1.0 / 2.0], [1.0 / 3.0]])
STUDY_Q = BoxSet([0.0, -np.inf], [np.inf, 0.0])
STUDY_C = BoxSet([0.0], [np.inf])

# gamma = 1, alpha = 1/7, constant inertia as tabulated
TABLE1_SCHEDULE = schedule_case(1, as_tabulated=True)
BASELINE_SCHEDULE = ScheduleSpec(Rule.const(1), Rule.rat(0, 1, 0, 7))


def study_problem(x0: float, x1: float, schedule: ScheduleSpec | None = None,
                  variant: str = "banach", max_iter: int = 24,
                  p: float = 2.0) -> ProblemSpec:
    """The one-dimensional split problem of the numerical study.

    ``max_iter = 24`` produces iterates up to ``x_25``.
    """
    e1 = SpaceSpec(1, p)
    e2 = SpaceSpec(2, p)
    if schedule is None:
        schedule = BASELINE_SCHEDULE if variant == "baseline_ma" else TABLE1_SCHEDULE
    return ProblemSpec(
        space1=e1, space2=e2,
        A=LinearOperator(STUDY_MATRIX, e1, e2),
        T=scaling_map(0.25), S=projection_map(STUDY_Q),
        x0=e1.point([x0]), x1=e1.point([x1]),
        schedule=schedule, base_set=STUDY_C,
        stop=StoppingRule(max_iter=max_iter), variant=variant,
        x_star=e1.zero(),
    )


def table1_columns(max_iter: int = 24) -> list:
    """``(label, problem)`` for the baseline vs inertial comparison."""
    return [
        ("ma_x1=6", study_problem(6, 6, variant="baseline_ma", max_iter=max_iter)),
        ("ma_x1=3", study_problem(3, 3, variant="baseline_ma", max_iter=max_iter)),
        ("alg_x0=x1=6", study_problem(6, 6, max_iter=max_iter)),
        ("alg_x0=x1=3", study_problem(3, 3, max_iter=max_iter)),
    ]


def table2_columns(max_iter: int = 24, as_tabulated: bool = True) -> list:
    """``(label, problem)`` for Cases 1-4 started from ``x0 = 8, x1 = 6``."""
    return [(f"case{k}", study_problem(8, 6, schedule_case(k, as_tabulated),
                                       max_iter=max_iter))
            for k in (1, 2, 3, 4)]


def inclusion_problem(A, T: FixedPointMap, B: MonotoneLinearOp, K: MonotoneLinearOp,
                      mu: float, x0, x1, schedule: ScheduleSpec,
                      stop: StoppingRule = StoppingRule(), x_star=None) -> ProblemSpec:
    """Split fixed point / inclusion problem in Hilbert spaces.

    Seeks ``x`` with ``T x = x``, ``K x + c_K = 0`` and ``B(A x) + c_B = 0``.
    ``A`` is a matrix; both spaces use ``p = 2``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    e1, e2 = SpaceSpec(A.shape[1]), SpaceSpec(A.shape[0])
    return ProblemSpec(
        space1=e1, space2=e2, A=LinearOperator(A, e1, e2),
        T=compose(T, resolvent_linear(K, mu)), S=resolvent_linear(B, mu),
        x0=e1.point(x0), x1=e1.point(x1), schedule=schedule, stop=stop,
        variant="inclusion", x_star=None if x_star is None else e1.point(x_star),
    )


def equilibrium_problem(A, F: MonotoneLinearOp, Q: BoxSet, r: float, x0, x1,
                        schedule: ScheduleSpec, T: FixedPointMap | None = None,
                        C: BoxSet | None = None, stop: StoppingRule = StoppingRule(),
                        x_star=None) -> ProblemSpec:
    """Split fixed point / equilibrium problem in Hilbert spaces.

    ``S`` is the resolvent of the bifunction ``<M x + c, y - x>`` on ``Q``;
    ``C`` (default: whole space) is both the base set and the set ``z_n`` is
    projected onto.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    e1, e2 = SpaceSpec(A.shape[1]), SpaceSpec(A.shape[0])
    return ProblemSpec(
        space1=e1, space2=e2, A=LinearOperator(A, e1, e2),
        T=identity_map() if T is None else T,
        S=equilibrium_resolvent(F, Q, r),
        x0=e1.point(x0), x1=e1.point(x1), schedule=schedule,
        base_set=C, stop=stop, variant="equilibrium",
        x_star=None if x_star is None else e1.point(x_star),
    )


def random_hilbert_problem(seed: int, max_iter: int = 25, variant: str = "hilbert",
                           p: float = 2.0) -> ProblemSpec:
    """Seeded problem with ``0`` in its solution set.

    Dimensions 1-3, a Gaussian operator, ``T`` a scaling or a box projection
    and ``S`` a box projection, every box containing the origin.
    """
    rng = np.random.default_rng(seed)
    d1, d2 = (int(v) for v in rng.integers(1, 4, size=2))
    e1, e2 = SpaceSpec(d1, p), SpaceSpec(d2, p)
    A = LinearOperator(rng.normal(size=(d2, d1)), e1, e2)

    def box(d):
        return BoxSet(-rng.uniform(0.0, 2.0, d), rng.uniform(0.0, 2.0, d))

    T = scaling_map(rng.uniform(0.1, 1.0)) if rng.uniform() < 0.5 else projection_map(box(d1))
    S = projection_map(box(d2))
    gmax = 2.0 / A.norm_upper_bound ** 2
    schedule = ScheduleSpec(Rule.const(rng.uniform(0.1, 0.9) * gmax),
                            Rule.const(rng.uniform(0.1, 0.9)),
                            Rule.const(rng.uniform(-0.5, 0.8)))
    return ProblemSpec(
        space1=e1, space2=e2, A=A, T=T, S=S,
        x0=e1.point(rng.normal(scale=3.0, size=d1)),
        x1=e1.point(rng.normal(scale=3.0, size=d1)),
        schedule=schedule, stop=StoppingRule(max_iter=max_iter),
        variant=variant, x_star=e1.zero(),
    )
