"""Load matrix assembly, zero-order system outcomes, lambda-dependent
system pieces and their Taylor expansions."""

import numpy as np
import pytest

import fredload as fl
from fredload.load_system import (
    NonUnique,
    NoSolution,
    UniqueLoads,
    solve_zero_order_system,
)
from util import make_problem, make_random_regular_problem


def _discretized(problem, nodes=64):
    return fl.discretize(problem.kernel, problem.master_rule(nodes))


def test_assemble_A0_zero_coefficient():
    problem = make_problem("0", "1", [("0", fl.point_load(0.0))])
    assert np.array_equal(fl.assemble_A0(problem), [[0.0]])


def test_assemble_A0_unit_coefficient():
    problem = make_problem("0", "1", [("1", fl.point_load(0.0))])
    assert fl.assemble_A0(problem) == pytest.approx(np.array([[1.0]]), abs=1e-15)


def test_assemble_A0_two_loads_closed_form():
    # a1(t) = t, a2(t) = 1; gamma1 = integral over [0,1], gamma2 = x(1).
    problem = make_problem(
        "0",
        "1",
        [
            ("t", fl.integral_load(0.0, 1.0, fl.parse("1", {"s"}))),
            ("1", fl.point_load(1.0)),
        ],
    )
    expected = [[0.5, 1.0], [1.0, 1.0]]
    assert fl.assemble_A0(problem) == pytest.approx(np.array(expected), abs=1e-13)


def test_assemble_f_gamma():
    problem = make_problem(
        "0", "t^2", [("0", fl.point_load(0.5)), ("0", fl.integral_load(0.0, 1.0, fl.parse("1", {"s"})))]
    )
    assert fl.assemble_f_gamma(problem) == pytest.approx([0.25, 1.0 / 3.0], abs=1e-13)


def test_zero_order_unique():
    outcome = solve_zero_order_system(np.zeros((1, 1)), np.array([1.0]))
    assert isinstance(outcome, UniqueLoads)
    assert outcome.c == pytest.approx([1.0])


def test_zero_order_no_solution():
    outcome = solve_zero_order_system(np.eye(1), np.array([1.0]))
    assert isinstance(outcome, NoSolution)
    assert outcome.defect == pytest.approx(1.0)


def test_zero_order_non_unique():
    outcome = solve_zero_order_system(np.eye(1), np.array([0.0]))
    assert isinstance(outcome, NonUnique)
    assert outcome.nullspace.shape == (1, 1)
    assert abs(outcome.nullspace[0, 0]) == pytest.approx(1.0)


def test_zero_order_mixed_rank():
    a0 = np.diag([1.0, 0.0])
    consistent = solve_zero_order_system(a0, np.array([0.0, 2.0]))
    assert isinstance(consistent, NonUnique)
    assert consistent.particular == pytest.approx([0.0, 2.0], abs=1e-12)
    inconsistent = solve_zero_order_system(a0, np.array([1.0, 2.0]))
    assert isinstance(inconsistent, NoSolution)


def test_classify_cases():
    assert fl.classify(np.zeros((1, 1))).kind == "regular"
    assert fl.classify(np.eye(3)).kind == "irregular-identity"
    assert fl.classify(np.diag([1.0, 0.0])).kind == "unsupported-irregular"


def test_classify_tolerates_quadrature_noise():
    a0 = np.eye(2) + 1e-13 * np.ones((2, 2))
    assert fl.classify(a0).kind == "irregular-identity"


def test_A_lambda_vanishes_at_zero():
    problem = make_problem("1", "1", [("1", fl.integral_load(0.0, 1.0, fl.parse("1", {"s"})))])
    kernel = _discretized(problem)
    assert np.array_equal(fl.A_lambda(problem, kernel, 0.0), np.zeros((1, 1)))


def test_A_lambda_rank_one_closed_form():
    # K = 1, a = 1, gamma = integral: A(lambda) = lambda / (1 - lambda) = 1 at 0.5.
    problem = make_problem("1", "1", [("1", fl.integral_load(0.0, 1.0, fl.parse("1", {"s"})))])
    kernel = _discretized(problem)
    assert fl.A_lambda(problem, kernel, 0.5) == pytest.approx(np.array([[1.0]]), abs=1e-10)


def test_A_lambda_matches_taylor_for_nilpotent_kernel():
    # K = t - 1/2 is nilpotent at depth 1, and the load x(1) does not
    # annihilate it, so A(lambda) = lambda * A_1 exactly for every lambda.
    problem = make_problem("t - 1/2", "1", [("t", fl.point_load(1.0))])
    kernel = _discretized(problem)
    iterated = fl.iterate_kernels(kernel, 5)
    (a1, a2, a3, _, _) = fl.taylor_A(problem, iterated, 5)
    assert np.max(np.abs(a2)) <= 1e-12
    assert np.max(np.abs(a3)) <= 1e-12
    for lam in [0.3, 2.0, -1.5]:
        assert np.max(np.abs(fl.A_lambda(problem, kernel, lam) - lam * a1)) <= 1e-8


def test_b_lambda_at_zero_equals_f_gamma():
    problem = make_problem("1", "1 + t", [("1", fl.point_load(0.25))])
    kernel = _discretized(problem)
    assert np.array_equal(fl.b_lambda(problem, kernel, 0.0), fl.assemble_f_gamma(problem))


def test_b_lambda_zero_source():
    problem = make_problem("1", "0", [("1", fl.point_load(0.25))])
    kernel = _discretized(problem)
    for lam in [0.0, 0.3, -0.4]:
        assert np.max(np.abs(fl.b_lambda(problem, kernel, lam))) <= 1e-14


def test_b_lambda_rank_one_closed_form():
    problem = make_problem("1", "1", [("1", fl.integral_load(0.0, 1.0, fl.parse("1", {"s"})))])
    kernel = _discretized(problem)
    assert fl.b_lambda(problem, kernel, 0.5) == pytest.approx([2.0], abs=1e-10)


def test_taylor_A_zero_under_annihilating_loads():
    problem = make_problem("t - 1/2", "1", [("t", fl.integral_load(0.0, 1.0, fl.parse("1", {"s"})))])
    kernel = _discretized(problem)
    iterated = fl.iterate_kernels(kernel, 6)
    for a_m in fl.taylor_A(problem, iterated, 6):
        assert np.max(np.abs(a_m)) <= 1e-12


def test_taylor_A_zero_kernel():
    problem = make_problem("0", "1", [("t", fl.point_load(0.5))])
    kernel = _discretized(problem, nodes=16)
    iterated = fl.iterate_kernels(kernel, 4)
    for a_m in fl.taylor_A(problem, iterated, 4):
        assert np.array_equal(a_m, np.zeros((1, 1)))


def test_taylor_A_constant_kernel_all_ones():
    problem = make_problem("1", "1", [("1", fl.integral_load(0.0, 1.0, fl.parse("1", {"s"})))])
    kernel = _discretized(problem)
    iterated = fl.iterate_kernels(kernel, 8)
    for a_m in fl.taylor_A(problem, iterated, 8):
        assert a_m == pytest.approx(np.array([[1.0]]), abs=1e-10)


def test_series_consistency_random_problems():
    rng = np.random.default_rng(23)
    for _ in range(5):
        problem, kernel, lam = make_random_regular_problem(rng)
        iterated = fl.iterate_kernels(kernel, 30)
        a_coeffs = fl.taylor_A(problem, iterated, 30)
        b_coeffs = fl.taylor_b(problem, iterated, 30)
        a_series = sum(lam**m * a_coeffs[m - 1] for m in range(1, 31))
        b_series = fl.assemble_f_gamma(problem) + sum(
            lam**m * b_coeffs[m - 1] for m in range(1, 31)
        )
        assert np.max(np.abs(fl.A_lambda(problem, kernel, lam) - a_series)) <= 1e-8
        assert np.max(np.abs(fl.b_lambda(problem, kernel, lam) - b_series)) <= 1e-8


def test_degeneration_under_exact_annihilation():
    # Loads annihilate the kernel: A(lambda) = 0 and the lambda-system
    # collapses onto the zero-order one.
    problem = make_problem(
        "t - 1/2", "1 + t", [("t", fl.integral_load(0.0, 1.0, fl.parse("1", {"s"})))]
    )
    kernel = _discretized(problem)
    norm = fl.operator_norm(kernel)
    for lam in np.linspace(-0.5, 0.5, 7) / norm:
        assert np.max(np.abs(fl.A_lambda(problem, kernel, float(lam)))) <= 1e-8
    outcome = solve_zero_order_system(fl.assemble_A0(problem), fl.assemble_f_gamma(problem))
    assert isinstance(outcome, UniqueLoads)
    solution = fl.solve_regular(problem, kernel, 0.4 / norm)
    assert solution.x_gamma == pytest.approx(outcome.c, abs=1e-8)


def test_necessity_of_zero_order_system():
    # For a solver-produced solution under annihilating loads, the
    # recomputed load vector satisfies (E - A0) c = f_gamma.
    problem = make_problem(
        "t - 1/2", "exp(t)", [("t^2", fl.integral_load(0.0, 1.0, fl.parse("1", {"s"})))]
    )
    kernel = _discretized(problem)
    solution = fl.solve_regular(problem, kernel, 0.7)
    c = np.array([fl.apply(load.functional, solution.x) for load in problem.loads])
    a0 = fl.assemble_A0(problem)
    lhs = (np.eye(1) - a0) @ c
    assert lhs == pytest.approx(fl.assemble_f_gamma(problem), abs=1e-8)


def test_build_load_system_invariants():
    problem = make_problem("t*s", "1", [("t", fl.point_load(0.5))])
    kernel = _discretized(problem)
    system = fl.build_load_system(problem, kernel)
    assert np.array_equal(system.A_of_lambda(0.0), np.zeros((1, 1)))
    assert np.max(np.abs(system.b_of_lambda(0.0) - system.f_gamma)) <= 1e-12
    assert system.A0 == pytest.approx(np.array([[0.5]]), abs=1e-13)
