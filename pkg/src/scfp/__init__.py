"""Inertial shrinking-projection methods for split common fixed point problems.

Finite-dimensional l_p geometry (:mod:`scfp.space`), Bregman projections onto
polyhedral shrinking sets (:mod:`scfp.projections`), the maps the algorithms
consume (:mod:`scfp.operators`), the solvers (:mod:`scfp.solvers`) and a
benchmark command line (:mod:`scfp.cli`).
"""
from .operators import (ContractionError, FixedPointMap, MonotoneLinearOp,
                        check_bregman_quasi_nonexpansive,
                        check_firmly_nonexpansive_like, compose,
                        equilibrium_resolvent, identity_map, projection_map,
                        resolvent_linear, scaling_map)
from .projections import (BoxSet, HalfSpace, InfeasibleSetError, ShrinkingSet,
                          bregman_project, halfspace_from_bregman_pair,
                          metric_project_box)
from .solvers import (NumericalFailure, ProblemSpec, Rule, ScheduleError,
                      ScheduleSpec, StoppingRule, Trace, gamma_upper_bound, run,
                      schedule_case)
from .space import (DualPoint, LinearOperator, Point, SpaceSpec, adjoint_apply,
                    bregman_distance, dual_norm, duality_map,
                    duality_map_inverse, norm_p, operator_norm_bound)

__version__ = "0.1.0"
