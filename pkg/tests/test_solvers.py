import math
import warnings
from dataclasses import replace

import numpy as np
import pytest

from oracles import interval_grid_project, spectral_norm_grid
from reference_tables import TABLE1, TABLE2
from scfp.checks import trajectory_gap, verify_trace
from scfp.operators import (MonotoneLinearOp, identity_map, projection_map,
                            scaling_map)
from scfp.problems import (STUDY_MATRIX, equilibrium_problem, inclusion_problem,
                           random_hilbert_problem, study_problem)
from scfp.projections import BoxSet, InfeasibleSetError
from scfp.solvers import (ProblemSpec, Rule, ScheduleError, ScheduleSpec,
                          StoppingRule, gamma_upper_bound, initial_state, run,
                          schedule_case, step_banach, step_baseline_ma,
                          step_hilbert)
from scfp.space import LinearOperator, SpaceSpec

H1, H2 = SpaceSpec(1), SpaceSpec(2)
PRINTED_THETA = ScheduleSpec(Rule.const(1), Rule.rat(0, 1, 0, 7), Rule.rat(0, 1, 0, 2))
SIMPLE = ScheduleSpec(Rule.const(1.0), Rule.const(0.5), Rule.const(0.2))


def x_at(trace, n):
    return trace.iterates()[n].coords[0]


class TestRule:
    def test_parse_const_and_fraction(self):
        assert Rule.parse("const:1/7")(3) == pytest.approx(1 / 7)
        assert Rule.parse("const:2.5")(1) == 2.5

    def test_parse_rational(self):
        assert Rule.parse("rat:2,3,2,0")(2) == pytest.approx(7 / 4)

    @pytest.mark.parametrize("text", ["cst:1", "rat:1,2,3", "const:x", "rat:0,1,0,0"])
    def test_parse_errors(self, text):
        with pytest.raises(ValueError):
            Rule.parse(text)(1)

    def test_round_trip_text(self):
        r = Rule.rat(2, 1, 10, 2)
        assert Rule.parse(str(r)) == r


class TestSchedules:
    def test_case1_printed(self):
        assert schedule_case(1).values(5) == pytest.approx((1.0, 1 / 7, 0.5))

    def test_case4_theta1(self):
        assert schedule_case(4).theta(1) == pytest.approx(0.25)

    def test_case2_gamma2(self):
        assert schedule_case(2).gamma(2) == pytest.approx(7 / 4)

    def test_tabulated_inertia(self):
        assert schedule_case(3, as_tabulated=True).theta(1) == pytest.approx(0.2)
        assert schedule_case(4, as_tabulated=True) == schedule_case(4)

    def test_unknown_case(self):
        with pytest.raises(ValueError):
            schedule_case(5)

    def test_alpha_outside_unit_interval(self):
        s = ScheduleSpec(Rule.const(1), Rule.const(1.5))
        with pytest.raises(ScheduleError, match=r"\(0, 1\)"):
            s.validate(1, 2.0)

    def test_gamma_bound(self):
        s = ScheduleSpec(Rule.const(3), Rule.const(0.5))
        with pytest.raises(ScheduleError, match="gamma_1"):
            s.validate(1, 2.0)

    def test_theta_bound_and_warning(self):
        with pytest.raises(ScheduleError):
            ScheduleSpec(Rule.const(1), Rule.const(0.5), Rule.const(0.9),
                         theta_bound=0.5).validate(1, 2.0)
        with pytest.warns(RuntimeWarning):
            ScheduleSpec(Rule.const(1), Rule.const(0.5), Rule.const(1.5)).validate(1, 2.0)


class TestGammaBound:
    def test_study_operator(self):
        A = LinearOperator(STUDY_MATRIX, H1, H2)
        assert gamma_upper_bound(H1, A) == pytest.approx(72 / 13, rel=1e-12)
        assert 2 / spectral_norm_grid(STUDY_MATRIX) ** 2 == pytest.approx(72 / 13, rel=1e-9)

    def test_unit_norm(self):
        assert gamma_upper_bound(H2, LinearOperator.identity(H2)) == pytest.approx(2.0)

    def test_zero_operator(self):
        assert gamma_upper_bound(H1, LinearOperator(np.zeros((2, 1)), H1, H2)) == math.inf


class TestFirstStep:
    def test_internals(self):
        st = initial_state(study_problem(6, 6, PRINTED_THETA))
        rec = step_banach(st, 1)
        assert rec.w.coords[0] == 6.0
        assert rec.z.coords[0] == pytest.approx(16 / 3, rel=1e-15)
        assert rec.y.coords[0] == pytest.approx(40 / 21, rel=1e-15)
        assert rec.x_next.coords[0] == pytest.approx(76 / 21, rel=1e-15)
        # hand oracle: argmin of (6 - u)^2 over [0, 76/21] on a grid
        assert interval_grid_project(0, 76 / 21, 6) == pytest.approx(76 / 21, abs=1e-4)
        assert f"{rec.x_next.coords[0]:.15f}" == TABLE1[2][2]

    def test_two_halfspaces_per_iteration(self):
        st = initial_state(study_problem(6, 6))
        for n in (1, 2, 3):
            step_banach(st, n)
            assert len(st.C.halfspaces) == 2 * n

    def test_no_inertia_when_theta_zero(self):
        sch = ScheduleSpec(Rule.const(1), Rule.const(0.5))
        st = initial_state(study_problem(6, 4, sch))
        rec = step_banach(st, 1)
        assert rec.w.coords[0] == 4.0

    def test_hilbert_x3(self):
        tr = run(study_problem(3, 3, variant="hilbert", max_iter=1))
        assert f"{x_at(tr, 2):.15f}" == "1.809523809523809"

    def test_hilbert_x6_row6(self):
        tr = run(study_problem(6, 6, variant="hilbert", max_iter=5))
        assert f"{x_at(tr, 6):.15f}" == "0.211743715446802"

    def test_zero_operator_keeps_w(self):
        e1, e2 = SpaceSpec(2), SpaceSpec(1)
        pb = ProblemSpec(e1, e2, LinearOperator(np.zeros((1, 2)), e1, e2),
                         scaling_map(0.5), identity_map(), e1.point([1, 2]),
                         e1.point([2, 1]), SIMPLE, variant="hilbert",
                         stop=StoppingRule(5))
        for rec in run(pb).records:
            assert np.array_equal(rec.z.coords, rec.w.coords)


class TestBaseline:
    @pytest.mark.parametrize("x1, text", [(6, "3.952380952380953"), (3, "1.976190476190476")])
    def test_first_step(self, x1, text):
        st = initial_state(study_problem(x1, x1, variant="baseline_ma"))
        assert f"{step_baseline_ma(st, 1).x_next.coords[0]:.15f}" == text

    def test_projects_x1(self):
        # x0 differs from x1 but the baseline ignores it
        a = run(study_problem(6, 6, variant="baseline_ma", max_iter=5))
        b = run(study_problem(9, 6, variant="baseline_ma", max_iter=5))
        assert trajectory_gap(a, b) == 0.0
        assert a.first_index == 1 and 0 not in a.iterates()

    def test_stationary_at_solution(self):
        tr = run(study_problem(0, 0, variant="baseline_ma", max_iter=5))
        assert all(rec.x_next.coords[0] == 0.0 for rec in tr.records)


class TestRun:
    def test_x25(self):
        tr = run(study_problem(6, 6))
        assert len(tr.records) == 24 and tr.reason == "max_iter"
        assert x_at(tr, 25) == pytest.approx(float(TABLE1[25][2]), abs=1e-15)

    def test_case4_first(self):
        tr = run(study_problem(8, 6, schedule_case(4), max_iter=1))
        assert f"{x_at(tr, 2):.15f}" == TABLE2[2][3]

    def test_single_iteration(self):
        assert len(run(study_problem(6, 6, max_iter=1)).records) == 1

    def test_step_tol(self):
        pb = replace(study_problem(6, 6, max_iter=200), stop=StoppingRule(200, step_tol=1e-9))
        tr = run(pb)
        assert tr.reason == "step_tol" and tr.records[-1].step_norm <= 1e-9

    def test_residual_tol(self):
        pb = replace(study_problem(6, 6, max_iter=200),
                     stop=StoppingRule(200, residual_tol=1e-8))
        tr = run(pb)
        assert tr.reason == "residual_tol"

    def test_deterministic(self):
        assert trajectory_gap(run(study_problem(8, 6)), run(study_problem(8, 6))) == 0.0

    def test_schedule_checked_up_front(self):
        sch = ScheduleSpec(Rule.rat(1, 0, 0, 1), Rule.const(0.5))  # gamma_n = n
        with pytest.raises(ScheduleError, match="gamma_6"):
            run(study_problem(6, 6, sch, max_iter=10))

    def test_invalid_stop(self):
        with pytest.raises(ValueError):
            StoppingRule(0)

    def test_start_outside_base(self):
        with pytest.raises(ValueError):
            study_problem(-1, 6)

    def test_empty_solution_set_detected(self):
        # T fixes only 5, S forces A x <= 0: no common solution
        e1 = SpaceSpec(1)
        pb = ProblemSpec(e1, e1, LinearOperator([[1.0]], e1, e1),
                         projection_map(BoxSet([5], [5])), projection_map(BoxSet([-np.inf], [0])),
                         e1.point([1.0]), e1.point([1.0]), SIMPLE, stop=StoppingRule(60))
        with pytest.raises(InfeasibleSetError):
            run(pb)

    def test_general_p_run(self):
        pb = study_problem(6, 6, max_iter=24, p=4.0)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            tr = run(pb)
        v = verify_trace(tr)
        assert v["feasibility_slack"] >= -1e-9
        assert v["monotone_drop"] <= 1e-10 and v["descent_chain"] <= 1e-9
        assert abs(x_at(tr, 25)) < abs(x_at(tr, 2))


class TestInvariants:
    @pytest.mark.parametrize("case", [1, 2, 3, 4])
    def test_study_cases(self, case):
        tr = run(study_problem(8, 6, schedule_case(case)))
        v = verify_trace(tr)
        assert v["feasibility_slack"] >= -1e-9
        assert v["monotone_drop"] <= 1e-10
        assert v["descent_chain"] <= 1e-9

    def test_nesting_by_sampling(self):
        tr = run(study_problem(8, 6))
        C = tr.shrinking_set
        grid = np.linspace(-1, 9, 4001)
        prev = np.array([C.prefix(0).contains([g]) for g in grid])
        for k in range(2, len(C.halfspaces) + 1, 2):
            cur = np.array([C.prefix(k).contains([g]) for g in grid])
            assert not np.any(cur & ~prev)
            prev = cur

    @pytest.mark.parametrize("x0", [6, 3])
    def test_residual_decay(self, x0):
        rec = run(study_problem(x0, x0)).records[-1]
        assert max(rec.residual_S, rec.residual_T, rec.step_norm) < 1e-6

    def test_random_problems_banach_equals_hilbert(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            pb = random_hilbert_problem(int(rng.integers(2 ** 31)))
            a = run(replace(pb, variant="banach"))
            b = run(replace(pb, variant="hilbert"))
            assert trajectory_gap(a, b) <= 1e-12
            assert verify_trace(b)["feasibility_slack"] >= -1e-9


class TestApplications:
    def test_inclusion_with_zero_k_is_hilbert(self):
        B = MonotoneLinearOp([[2.0, 0.0], [0.0, 1.0]], [0.0, 0.0])
        A = [[1.0, 0.5], [0.0, 1.0]]
        pb = inclusion_problem(A, scaling_map(0.5), B, MonotoneLinearOp.zero(2), 1.0,
                               [3.0, -1.0], [2.0, 1.0], SIMPLE)
        assert trajectory_gap(run(pb), run(replace(pb, variant="hilbert"))) == 0.0

    def test_inclusion_converges_to_zero_of_b(self):
        B = MonotoneLinearOp([[1.0, 0.0], [0.0, 3.0]], [-1.0, 3.0])  # zero at (1, -1)
        pb = inclusion_problem(np.eye(2), identity_map(), B, MonotoneLinearOp.zero(2), 1.0,
                               [4.0, 2.0], [4.0, 2.0], SIMPLE,
                               stop=StoppingRule(500, residual_tol=1e-8))
        tr = run(pb)
        assert tr.reason == "residual_tol"
        assert np.allclose(tr.final.coords, [1.0, -1.0], atol=1e-6)

    def test_inclusion_stationary_at_solution(self):
        B = MonotoneLinearOp([[1.0]], [-2.0])
        pb = inclusion_problem([[1.0]], identity_map(), B, MonotoneLinearOp.zero(1), 1.0,
                               [2.0], [2.0], SIMPLE, stop=StoppingRule(5))
        assert all(rec.x_next.coords[0] == 2.0 for rec in run(pb).records)

    def test_equilibrium_zero_bifunction_matches_projection(self):
        Q = BoxSet([0, -np.inf], [np.inf, 0])
        A = STUDY_MATRIX
        sch = schedule_case(1, True)
        pe = equilibrium_problem(A, MonotoneLinearOp.zero(2), Q, 1.0, [6.0], [6.0], sch,
                                 T=scaling_map(0.25), stop=StoppingRule(24))
        ph = study_problem(6, 6, variant="hilbert")
        ph = replace(ph, base_set=BoxSet.whole(1))
        assert trajectory_gap(run(pe), run(ph)) <= 1e-12

    def test_equilibrium_scalar(self):
        F = MonotoneLinearOp([[1.0]], [0.0])
        pb = equilibrium_problem([[1.0]], F, BoxSet.whole(1), 1.0, [4.0], [4.0], SIMPLE,
                                 stop=StoppingRule(50))
        tr = run(pb)
        assert any(abs(x.coords[0]) <= 1e-6 for x in tr.iterates().values())
        assert abs(tr.final.coords[0]) <= 1e-6

    def test_equilibrium_stationary(self):
        F = MonotoneLinearOp([[1.0]], [0.0])
        pb = equilibrium_problem([[1.0]], F, BoxSet([-5], [5]), 1.0, [0.0], [0.0], SIMPLE,
                                 C=BoxSet([-3], [3]), stop=StoppingRule(5))
        assert all(rec.x_next.coords[0] == 0.0 for rec in run(pb).records)

    def test_non_hilbert_variant_rejected(self):
        with pytest.raises(ValueError, match="p = 2"):
            study_problem(6, 6, variant="hilbert", p=4.0)
