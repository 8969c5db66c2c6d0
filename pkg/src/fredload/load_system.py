"""Finite linear systems governing the load vector.

Applying the loads to the equation collapses it onto n unknowns
c_k = <gamma_k, x>. Two systems appear:

  (E - A0) c = f_gamma                      when the loads annihilate K
  (E - A0 - A(lambda)) c = b(lambda)        in general

with A0[i,k] = <gamma_i, a_k>, f_gamma[i] = <gamma_i, f>,
A(lambda)[i,k] = <gamma_i, lambda * (G W a_k)(t)> and
b(lambda)[i] = <gamma_i, f> + <gamma_i, lambda * (G W f)(t)>, where G is
the resolvent kernel on the grid. The lambda factor is kept inside A so
that A(0) = 0 exactly and the Taylor expansion of A starts at lambda^1
with coefficient matrices A_m[i,k] = <gamma_i, (K_m W a_k)(t)> built from
the iterated kernels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from . import functionals
from .kernel_ops import DiscreteKernel, IteratedKernels, resolvent
from .problem import Load, ProblemSpec
from .quadrature import GridFunction

__all__ = [
    "ProblemSpec",
    "Load",
    "LoadSystem",
    "Classification",
    "UniqueLoads",
    "NoSolution",
    "NonUnique",
    "assemble_A0",
    "assemble_f_gamma",
    "build_load_system",
    "solve_zero_order_system",
    "A_lambda",
    "b_lambda",
    "taylor_A",
    "taylor_b",
    "classify",
]


def assemble_A0(problem: ProblemSpec) -> np.ndarray:
    """A0[i, k] = <gamma_i, a_k>, by exact evaluation of a_k."""
    n = problem.n
    out = np.empty((n, n))
    for i, row_load in enumerate(problem.loads):
        for k, col_load in enumerate(problem.loads):
            out[i, k] = functionals.apply(row_load.functional, col_load.coeff)
    return out


def assemble_f_gamma(problem: ProblemSpec) -> np.ndarray:
    """f_gamma[i] = <gamma_i, f>."""
    return np.asarray(
        [functionals.apply(load.functional, problem.source) for load in problem.loads]
    )


def _apply_loads_to_grid(problem: ProblemSpec, grid: GridFunction) -> np.ndarray:
    return np.asarray(
        [functionals.apply(load.functional, grid) for load in problem.loads]
    )


def A_lambda(problem: ProblemSpec, kernel: DiscreteKernel, lam: float) -> np.ndarray:
    """A(lambda)[i, k] = <gamma_i, lambda * (G W a_k)(t)>."""
    n = problem.n
    if lam == 0.0:
        return np.zeros((n, n))
    gamma = resolvent(kernel, lam).gamma
    coeffs = problem.coeff_values(kernel.rule)
    weighted = kernel.rule.weights[:, None] * coeffs
    images = lam * (gamma @ weighted)
    out = np.empty((n, n))
    for k in range(n):
        col = GridFunction(kernel.rule, images[:, k])
        out[:, k] = _apply_loads_to_grid(problem, col)
    return out


def b_lambda(problem: ProblemSpec, kernel: DiscreteKernel, lam: float) -> np.ndarray:
    """b(lambda)[i] = <gamma_i, f> + <gamma_i, lambda * (G W f)(t)>."""
    base = assemble_f_gamma(problem)
    if lam == 0.0:
        return base
    gamma = resolvent(kernel, lam).gamma
    f_vals = problem.source_values(kernel.rule)
    image = lam * (gamma @ (kernel.rule.weights * f_vals))
    return base + _apply_loads_to_grid(problem, GridFunction(kernel.rule, image))


def taylor_A(problem: ProblemSpec, iterated: IteratedKernels, depth: int) -> list[np.ndarray]:
    """Coefficients A_1..A_depth of A(lambda) = sum_m lambda^m A_m,
    A_m[i, k] = <gamma_i, (K_m W a_k)(t)>."""
    if depth > iterated.depth:
        raise ValueError(f"requested depth {depth} exceeds computed depth {iterated.depth}")
    rule = iterated.rule
    coeffs = problem.coeff_values(rule)
    weighted = rule.weights[:, None] * coeffs
    n = problem.n
    out = []
    for m in range(1, depth + 1):
        images = iterated.kernel(m) @ weighted
        a_m = np.empty((n, n))
        for k in range(n):
            a_m[:, k] = _apply_loads_to_grid(problem, GridFunction(rule, images[:, k]))
        out.append(a_m)
    return out


def taylor_b(problem: ProblemSpec, iterated: IteratedKernels, depth: int) -> list[np.ndarray]:
    """Coefficients b_1..b_depth of b(lambda) - f_gamma = sum_m lambda^m b_m,
    b_m[i] = <gamma_i, (K_m W f)(t)>."""
    if depth > iterated.depth:
        raise ValueError(f"requested depth {depth} exceeds computed depth {iterated.depth}")
    rule = iterated.rule
    weighted_f = rule.weights * problem.source_values(rule)
    out = []
    for m in range(1, depth + 1):
        image = iterated.kernel(m) @ weighted_f
        out.append(_apply_loads_to_grid(problem, GridFunction(rule, image)))
    return out


@dataclass(frozen=True, eq=False)
class LoadSystem:
    """A0, f_gamma and the lambda-dependent system pieces for one problem."""

    problem: ProblemSpec
    kernel: DiscreteKernel
    A0: np.ndarray
    f_gamma: np.ndarray
    A_of_lambda: Callable[[float], np.ndarray]
    b_of_lambda: Callable[[float], np.ndarray]


def build_load_system(problem: ProblemSpec, kernel: DiscreteKernel) -> LoadSystem:
    return LoadSystem(
        problem=problem,
        kernel=kernel,
        A0=assemble_A0(problem),
        f_gamma=assemble_f_gamma(problem),
        A_of_lambda=lambda lam: A_lambda(problem, kernel, lam),
        b_of_lambda=lambda lam: b_lambda(problem, kernel, lam),
    )


@dataclass(frozen=True)
class UniqueLoads:
    c: np.ndarray


@dataclass(frozen=True)
class NoSolution:
    """The right-hand side is not in the range of E - A0: no continuous
    solution of the equation exists."""

    defect: float


@dataclass(frozen=True)
class NonUnique:
    """E - A0 is singular but consistent: any particular + null-space
    combination satisfies the system."""

    particular: np.ndarray
    nullspace: np.ndarray  # columns span the null space


ZeroOrderOutcome = Union[UniqueLoads, NoSolution, NonUnique]


def solve_zero_order_system(
    A0: np.ndarray, f_gamma: np.ndarray, tol: float = 1e-10
) -> ZeroOrderOutcome:
    """Solve (E - A0) c = f_gamma, classifying the outcome.

    Singular-but-consistent systems return the minimum-norm particular
    solution together with an orthonormal null-space basis; inconsistent
    ones report the least-squares defect.
    """
    n = A0.shape[0]
    system = np.eye(n) - A0
    u, sing, vt = np.linalg.svd(system)
    scale = sing[0] if sing.size and sing[0] > 0 else 1.0
    rank = int(np.sum(sing > tol * max(scale, 1.0)))
    if rank == n:
        return UniqueLoads(c=np.linalg.solve(system, f_gamma))
    inv_sing = np.zeros_like(sing)
    inv_sing[:rank] = 1.0 / sing[:rank]
    particular = vt.T @ (inv_sing * (u.T @ f_gamma))
    defect = float(np.linalg.norm(system @ particular - f_gamma, np.inf))
    if defect > tol * (1.0 + float(np.linalg.norm(f_gamma, np.inf))):
        return NoSolution(defect=defect)
    return NonUnique(particular=particular, nullspace=vt[rank:].T.copy())


@dataclass(frozen=True)
class Classification:
    """Which constructive route the load matrix admits at lambda = 0."""

    kind: str  # "regular" | "irregular-identity" | "unsupported-irregular"
    det: float

    @property
    def is_regular(self) -> bool:
        return self.kind == "regular"

    @property
    def is_irregular_identity(self) -> bool:
        return self.kind == "irregular-identity"


def classify(
    A0: np.ndarray,
    tol_identity: Optional[float] = None,
    tol_det: float = 1e-10,
) -> Classification:
    """Regular when det(E - A0) is bounded away from zero; the identity
    case A0 = E gets its own label; a singular E - A0 with A0 != E is not
    handled by any route in this package."""
    n = A0.shape[0]
    norm = float(np.max(np.abs(A0))) if A0.size else 0.0
    if tol_identity is None:
        tol_identity = 1e-10 * (1.0 + norm)
    det = float(np.linalg.det(np.eye(n) - A0))
    if float(np.max(np.abs(A0 - np.eye(n)))) <= tol_identity:
        return Classification(kind="irregular-identity", det=det)
    if abs(det) > tol_det * (1.0 + norm):
        return Classification(kind="regular", det=det)
    return Classification(kind="unsupported-irregular", det=det)
