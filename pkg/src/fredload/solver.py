"""Solution routes for the loaded equation.

Four constructive paths produce x(t, lambda) on the master grid:

  regular     direct solve of the n x n load system at one lambda, then
              reconstruction through the resolvent (valid while
              det(E - A0) != 0 and lambda avoids characteristic numbers);
  successive  fixed-point iteration x_n = (I-L)^{-1}(lambda K x_{n-1} + f),
              geometric convergence for |lambda| <= q / l;
  nilpotent   finite polynomial in lambda when the iterated kernels
              terminate and the loads annihilate the kernel; exact for
              every lambda;
  irregular   Laurent expansion about lambda = 0 when A0 = E: the load
              vector is lambda^{-p} * nu(lambda) with nu built from the
              Taylor coefficients of A(lambda).

Every route reports the max-norm defect of the full equation on the grid,
recomputed from the returned grid function alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import functionals
from .errors import (
    CharacteristicNumberError,
    ConvergenceError,
    NoSolutionError,
    RoutePreconditionError,
    SingularLoadSystemError,
)
from .kernel_ops import (
    DiscreteKernel,
    IteratedKernels,
    discretize,
    iterate_kernels,
    nilpotency_index,
    operator_norm,
    resolvent_apply,
)
from .load_system import (
    A_lambda,
    Classification,
    NonUnique,
    NoSolution,
    ProblemSpec,
    UniqueLoads,
    assemble_A0,
    assemble_f_gamma,
    b_lambda,
    classify,
    solve_zero_order_system,
    taylor_A,
)
from .quadrature import GridFunction

__all__ = [
    "Solution",
    "IrregularExpansion",
    "solve_regular",
    "solve_successive",
    "solve_nilpotent",
    "solve_irregular",
    "solve_auto",
    "residual",
    "successive_bound",
    "regular_radius",
]

DEFAULT_TRUNCATION = 30
POLE_COEFF_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class IrregularExpansion:
    """Laurent data at lambda = 0: pole order, the Taylor coefficient
    matrices A_p..A_M of the load coupling, the contraction bound at the
    requested lambda, and the certified radius."""

    pole_order: int
    coefficients: tuple[np.ndarray, ...]
    nu_series: Callable[[float], np.ndarray]
    q: float
    rho: float
    tail_bound: float


@dataclass(frozen=True, eq=False)
class Solution:
    lam: float
    x: GridFunction
    x_gamma: np.ndarray
    route: str
    residual: float
    classification: Classification
    pole_order: Optional[int] = None
    history: Optional[tuple[float, ...]] = None
    expansion: Optional[IrregularExpansion] = None
    note: Optional[str] = None


def _recomputed_loads(problem: ProblemSpec, x: GridFunction) -> np.ndarray:
    return np.asarray(
        [functionals.apply(load.functional, x) for load in problem.loads]
    )


def _defect(problem: ProblemSpec, kernel: DiscreteKernel, lam: float, x: GridFunction) -> float:
    rule = kernel.rule
    c = _recomputed_loads(problem, x)
    coeffs = problem.coeff_values(rule)
    f_vals = problem.source_values(rule)
    kx = kernel.values @ (rule.weights * x.values)
    lhs = x.values - coeffs @ c - lam * kx - f_vals
    return float(np.max(np.abs(lhs)))


def residual(problem: ProblemSpec, solution: Solution) -> float:
    """Max-norm defect of the equation on the grid, with the loads
    recomputed from the grid function (not read from the solution)."""
    kernel = discretize(problem.kernel, solution.x.rule)
    return _defect(problem, kernel, solution.lam, solution.x)


def _reconstruct(
    problem: ProblemSpec, kernel: DiscreteKernel, lam: float, x_gamma: np.ndarray
) -> GridFunction:
    """x = u + lambda * G W u for u = f + sum_k a_k * x_gamma[k]."""
    rule = kernel.rule
    u = problem.source_values(rule) + problem.coeff_values(rule) @ x_gamma
    if lam == 0.0:
        return GridFunction(rule, u)
    return resolvent_apply(kernel, lam, GridFunction(rule, u))


def solve_regular(problem: ProblemSpec, kernel: DiscreteKernel, lam: float) -> Solution:
    """Direct route for det(E - A0) != 0: solve the n x n system
    (E - A0 - A(lambda)) x_gamma = b(lambda), then reconstruct x."""
    A0 = assemble_A0(problem)
    classification = classify(A0)
    if not classification.is_regular:
        raise RoutePreconditionError(
            f"regular route needs det(E - A0) != 0; classification is "
            f"{classification.kind} (det = {classification.det:.3e})"
        )
    n = problem.n
    a_lam = A_lambda(problem, kernel, lam)
    system = np.eye(n) - A0 - a_lam
    rhs = b_lambda(problem, kernel, lam)
    scale = 1.0 + float(np.max(np.abs(A0))) + float(np.max(np.abs(a_lam)))
    if _nearly_singular(system, scale):
        raise SingularLoadSystemError(
            f"load system E - A0 - A(lambda) is singular at lambda={lam!r}"
        )
    x_gamma = np.linalg.solve(system, rhs)
    x = _reconstruct(problem, kernel, lam, x_gamma)
    return Solution(
        lam=lam,
        x=x,
        x_gamma=x_gamma,
        route="regular",
        residual=_defect(problem, kernel, lam, x),
        classification=classification,
    )


def _nearly_singular(matrix: np.ndarray, scale: float = 0.0) -> bool:
    # `scale` supplies the natural magnitude of the assembly; without it a
    # 1 x 1 system that collapsed to roundoff would look well-conditioned.
    sing = np.linalg.svd(matrix, compute_uv=False)
    reference = max(float(sing[0]), scale)
    if reference == 0.0:
        return True
    return float(sing[-1]) <= 1e-12 * reference


def successive_bound(problem: ProblemSpec, kernel: DiscreteKernel) -> float:
    """Computable upper estimate l for the norm of (I-L)^{-1} K, so the
    fixed-point route is admitted for |lambda| <= q / l."""
    A0 = assemble_A0(problem)
    n = problem.n
    inv = np.linalg.inv(np.eye(n) - A0)
    coeffs = problem.coeff_values(kernel.rule)
    a_sup = float(np.max(np.sum(np.abs(coeffs), axis=1)))
    gamma_max = max(functionals.functional_norm(load.functional) for load in problem.loads)
    amplification = 1.0 + a_sup * float(np.linalg.norm(inv, np.inf)) * gamma_max
    return amplification * operator_norm(kernel)


def solve_successive(
    problem: ProblemSpec,
    kernel: DiscreteKernel,
    lam: float,
    q: float = 0.9,
    max_iter: int = 200,
    tol: float = 1e-10,
) -> Solution:
    """Fixed-point route: x_n = (I-L)^{-1}(lambda K x_{n-1} + f), x_0 = 0.

    (I-L)^{-1} g is computed by solving (E - A0) c = g_gamma and returning
    g + (a, c). The route refuses |lambda| beyond q / l, which guarantees
    geometric convergence; the difference norms become the iterate history.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must be in (0, 1), got {q}")
    A0 = assemble_A0(problem)
    classification = classify(A0)
    if not classification.is_regular:
        raise RoutePreconditionError(
            f"successive route needs det(E - A0) != 0; classification is "
            f"{classification.kind}"
        )
    bound_l = successive_bound(problem, kernel)
    admissible = math.inf if bound_l == 0.0 else q / bound_l
    if abs(lam) > admissible:
        raise RoutePreconditionError(
            f"|lambda|={abs(lam):.6g} exceeds the admissible bound q/l = "
            f"{admissible:.6g} (q={q}, l={bound_l:.6g})"
        )
    rule = kernel.rule
    n = problem.n
    system = np.eye(n) - A0
    coeffs = problem.coeff_values(rule)
    f_vals = problem.source_values(rule)

    def apply_inverse(g: np.ndarray) -> np.ndarray:
        g_gamma = _recomputed_loads(problem, GridFunction(rule, g))
        c = np.linalg.solve(system, g_gamma)
        return g + coeffs @ c

    x_prev = np.zeros(rule.n)
    history: list[float] = []
    for _ in range(max_iter):
        h = lam * (kernel.values @ (rule.weights * x_prev)) + f_vals
        x_next = apply_inverse(h)
        delta = float(np.max(np.abs(x_next - x_prev)))
        history.append(delta)
        x_prev = x_next
        if delta <= tol:
            x = GridFunction(rule, x_prev)
            return Solution(
                lam=lam,
                x=x,
                x_gamma=_recomputed_loads(problem, x),
                route="successive",
                residual=_defect(problem, kernel, lam, x),
                classification=classification,
                history=tuple(history),
            )
    raise ConvergenceError(
        f"no convergence within {max_iter} iterations (last delta {history[-1]:.3e})"
    )


def solve_nilpotent(
    problem: ProblemSpec,
    iterated: IteratedKernels,
    pnil: int,
    lam: float,
    condition_tol: float = 1e-10,
) -> Solution:
    """Polynomial route: when K_{p+1} = 0 and the loads annihilate the
    kernel, x = u + sum_{n=1}^{p} lambda^n K_n W u with u = f + (a, c) and
    c from the zero-order load system. Exact for every lambda."""
    if pnil < 0:
        raise ValueError(f"nilpotency index must be >= 0, got {pnil}")
    if pnil > iterated.depth:
        raise ValueError(
            f"nilpotency index {pnil} exceeds computed depth {iterated.depth}"
        )
    rule = iterated.rule
    kernel = DiscreteKernel(rule, iterated.kernel(1))
    reports = functionals.check_condition_one(problem, kernel, condition_tol)
    if not all(r.holds for r in reports):
        worst = max(r.deviation for r in reports)
        raise RoutePreconditionError(
            f"the loads do not annihilate the kernel slices (max deviation "
            f"{worst:.3e}); use the regular or irregular route"
        )
    A0 = assemble_A0(problem)
    classification = classify(A0)
    outcome = solve_zero_order_system(A0, assemble_f_gamma(problem))
    note = None
    if isinstance(outcome, NoSolution):
        raise NoSolutionError(
            "the zero-order load system is inconsistent: the equation has "
            "no solution in the class of continuous functions"
        )
    if isinstance(outcome, NonUnique):
        c = outcome.particular
        note = "load system singular but consistent; minimum-norm load vector used"
    else:
        assert isinstance(outcome, UniqueLoads)
        c = outcome.c
    u = problem.source_values(rule) + problem.coeff_values(rule) @ c
    x_vals = u.copy()
    wu = rule.weights * u
    for m in range(1, pnil + 1):
        x_vals += lam**m * (iterated.kernel(m) @ wu)
    x = GridFunction(rule, x_vals)
    return Solution(
        lam=lam,
        x=x,
        x_gamma=_recomputed_loads(problem, x),
        route="nilpotent",
        residual=_defect(problem, kernel, lam, x),
        classification=classification,
        pole_order=None,
        note=note,
    )


def _contraction_radius(norms: list[float], q_max: float = 0.9) -> float:
    """Largest r with sum_m norms[m] * r^(m+1) <= q_max (norms[m] is the
    coefficient of r^{m+1}); bisection on a monotone bound."""

    def q_bound(r: float) -> float:
        total = 0.0
        power = r
        for nm in norms:
            total += nm * power
            power *= r
            if not math.isfinite(total):
                return math.inf
        return total

    hi = 1e-8
    for _ in range(120):
        if q_bound(hi) > q_max:
            break
        hi *= 2.0
        if hi > 1e12:
            return math.inf
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if q_bound(mid) <= q_max:
            lo = mid
        else:
            hi = mid
    return lo


def solve_irregular(
    problem: ProblemSpec,
    kernel: DiscreteKernel,
    lam: float,
    truncation: int = DEFAULT_TRUNCATION,
    pole_tol: float = POLE_COEFF_TOL,
) -> Solution:
    """Laurent route for A0 = E: with A(lambda) = sum_{m>=p} lambda^m A_m
    and A_p invertible, the load vector is x_gamma = lambda^{-p} nu(lambda)
    where nu sums the geometric series
    -(I + A_p^{-1} B(lambda))^{-1} A_p^{-1} b(lambda),
    B(lambda) = sum_{m=p+1}^{M} lambda^{m-p} A_m. The series is summed in
    closed form by a dense solve; the contraction bound q certifies it."""
    A0 = assemble_A0(problem)
    classification = classify(A0)
    if classification.kind == "unsupported-irregular":
        raise RoutePreconditionError(
            "det(E - A0) = 0 with A0 != E: no constructive route exists in "
            "this package for that case"
        )
    if not classification.is_irregular_identity:
        raise RoutePreconditionError(
            f"irregular route needs A0 = E; classification is {classification.kind}"
        )
    if lam == 0.0:
        raise RoutePreconditionError(
            "the load vector has a pole at lambda = 0; request a nonzero lambda"
        )
    if truncation < 2:
        raise ValueError(f"truncation must be >= 2, got {truncation}")
    iterated = iterate_kernels(kernel, truncation)
    coeff_mats = taylor_A(problem, iterated, truncation)
    mags = [float(np.max(np.abs(a))) for a in coeff_mats]
    scale = max(mags) if mags else 0.0
    threshold = pole_tol * (1.0 + scale)
    pole = next((m for m, mag in enumerate(mags, start=1) if mag > threshold), None)
    if pole is None:
        raise RoutePreconditionError(
            "the load coupling A(lambda) vanishes to working precision at "
            f"every order up to {truncation}; no pole order can be assigned"
        )
    a_p = coeff_mats[pole - 1]
    if _nearly_singular(a_p, 1.0 + scale):
        raise RoutePreconditionError(
            f"the leading coefficient matrix A_{pole} of the load coupling "
            "is singular; the pole expansion does not apply"
        )
    tail = coeff_mats[pole:]
    tail_norms = [float(np.linalg.norm(np.linalg.solve(a_p, a_m), np.inf)) for a_m in tail]
    rho = _contraction_radius(tail_norms)

    def b_matrix(lam2: float) -> np.ndarray:
        total = np.zeros_like(a_p)
        power = lam2
        for a_m in tail:
            total += power * a_m
            power *= lam2
        return total

    def nu_series(lam2: float) -> np.ndarray:
        rhs = b_lambda(problem, kernel, lam2)
        return -np.linalg.solve(a_p + b_matrix(lam2), rhs)

    q_at = float(np.linalg.norm(np.linalg.solve(a_p, b_matrix(lam)), np.inf))
    if q_at >= 1.0:
        raise RoutePreconditionError(
            f"no contraction at lambda={lam!r}: q = {q_at:.6g} >= 1 "
            f"(certified radius rho = {rho:.6g})"
        )
    tail_bound = q_at ** (truncation - pole + 1) / (1.0 - q_at)
    nu = nu_series(lam)
    x_gamma = nu / lam**pole
    x = _reconstruct(problem, kernel, lam, x_gamma)
    expansion = IrregularExpansion(
        pole_order=pole,
        coefficients=tuple(coeff_mats[pole - 1 :]),
        nu_series=nu_series,
        q=q_at,
        rho=rho,
        tail_bound=tail_bound,
    )
    return Solution(
        lam=lam,
        x=x,
        x_gamma=x_gamma,
        route="irregular",
        residual=_defect(problem, kernel, lam, x),
        classification=classification,
        pole_order=pole,
        expansion=expansion,
    )


def regular_radius(
    problem: ProblemSpec,
    kernel: DiscreteKernel,
    q_max: float = 0.9,
    cap: float = 1e6,
) -> float:
    """Largest |lambda| (bisected grid) with norm((E-A0)^{-1} A(lambda))
    <= q_max, i.e. where the lambda-dependent load system stays a small
    perturbation of E - A0."""
    A0 = assemble_A0(problem)
    inv = np.linalg.inv(np.eye(problem.n) - A0)

    def ok(lam: float) -> bool:
        try:
            a_lam = A_lambda(problem, kernel, lam)
        except CharacteristicNumberError:
            return False
        return float(np.linalg.norm(inv @ a_lam, np.inf)) <= q_max

    hi = 1e-8
    for _ in range(120):
        if not (ok(hi) and ok(-hi)):
            break
        hi *= 2.0
        if hi > cap:
            return cap
    lo = 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if ok(mid) and ok(-mid):
            lo = mid
        else:
            hi = mid
    return lo


def solve_auto(
    problem: ProblemSpec,
    kernel: DiscreteKernel,
    lam: float,
    truncation: int = DEFAULT_TRUNCATION,
    condition_tol: float = 1e-10,
    nilpotency_tol: float = 1e-10,
) -> Solution:
    """Pick a route from the problem's structure.

    When the loads annihilate the kernel, the zero-order system decides
    solvability outright (no continuous solution when it is inconsistent)
    and a nilpotent kernel gets the exact polynomial route. Otherwise the
    classification of A0 selects the regular or irregular path.
    """
    iterated = iterate_kernels(kernel, truncation)
    reports = functionals.check_condition_one(problem, kernel, condition_tol)
    condition_holds = all(r.holds for r in reports)
    A0 = assemble_A0(problem)
    classification = classify(A0)
    if condition_holds:
        outcome = solve_zero_order_system(A0, assemble_f_gamma(problem))
        if isinstance(outcome, NoSolution):
            raise NoSolutionError(
                "the loads annihilate the kernel and the zero-order load "
                "system is inconsistent: the equation has no solution in "
                "the class of continuous functions"
            )
        pnil = nilpotency_index(iterated, nilpotency_tol)
        if pnil is not None:
            return solve_nilpotent(problem, iterated, pnil, lam, condition_tol)
    if classification.is_regular:
        return solve_regular(problem, kernel, lam)
    if classification.is_irregular_identity:
        return solve_irregular(problem, kernel, lam, truncation)
    raise RoutePreconditionError(
        "det(E - A0) = 0 with A0 != E: no constructive route exists in "
        "this package for that case"
    )
