"""Loads: linear functionals combining point evaluations and weighted
integrals, applied to callables, grid functions, and kernel slices.

A load has the form

    <gamma, x> = sum_i alpha_i * x(t_i) + sum_i integral_{a_i}^{b_i} m_i(s) x(s) ds

Each integral term carries its own quadrature sub-rule because [a_i, b_i]
generally does not line up with the master grid; grid functions are
evaluated off-node by barycentric interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Union

import numpy as np

from .expr import Expr, evaluate
from .quadrature import GridFunction, QuadratureRule, gauss_legendre, interpolate

if TYPE_CHECKING:
    from .kernel_ops import DiscreteKernel
    from .problem import ProblemSpec

__all__ = [
    "PointTerm",
    "IntegralTerm",
    "Functional",
    "point_load",
    "integral_load",
    "apply",
    "apply_to_kernel_slices",
    "check_condition_one",
    "ConditionReport",
    "functional_norm",
]


@dataclass(frozen=True)
class PointTerm:
    """alpha * x(t0)"""

    alpha: float
    t0: float


@dataclass(frozen=True, eq=False)
class IntegralTerm:
    """integral of m(s) * x(s) over [lower, upper] by the term's sub-rule."""

    lower: float
    upper: float
    weight: Expr
    rule: QuadratureRule

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(
                f"integral term needs lower < upper, got [{self.lower}, {self.upper}]"
            )
        if self.rule.a != self.lower or self.rule.b != self.upper:
            raise ValueError("sub-rule interval must match the term's interval")


@dataclass(frozen=True, eq=False)
class Functional:
    point_terms: tuple[PointTerm, ...]
    integral_terms: tuple[IntegralTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "point_terms", tuple(self.point_terms))
        object.__setattr__(self, "integral_terms", tuple(self.integral_terms))
        if not self.point_terms and not self.integral_terms:
            raise ValueError("a load needs at least one point or integral term")

    def describe(self) -> str:
        parts = [f"{p.alpha:g} @ {p.t0:g}" for p in self.point_terms]
        parts += [
            f"{term.weight.text.strip()} on [{term.lower:g}, {term.upper:g}]"
            for term in self.integral_terms
        ]
        return " + ".join(parts)


def point_load(t0: float, alpha: float = 1.0) -> Functional:
    """The local load x -> alpha * x(t0)."""
    return Functional(point_terms=(PointTerm(alpha, t0),), integral_terms=())


def integral_load(lower: float, upper: float, weight: Expr, nodes: int = 64) -> Functional:
    """The integral load x -> integral of weight(s) x(s) ds over [lower, upper]."""
    term = IntegralTerm(lower, upper, weight, gauss_legendre(nodes, lower, upper))
    return Functional(point_terms=(), integral_terms=(term,))


def _as_evaluator(x) -> Callable[[float], float]:
    if isinstance(x, GridFunction):
        return lambda t: interpolate(x, t)
    if isinstance(x, Expr):
        return lambda t: evaluate(x, {"t": t})
    return x


def apply(gamma: Functional, x: Union[Callable[[float], float], GridFunction]) -> float:
    """Apply the load to x; grid functions are interpolated off-node."""
    xf = _as_evaluator(x)
    total = 0.0
    for p in gamma.point_terms:
        total += p.alpha * xf(p.t0)
    for term in gamma.integral_terms:
        snodes = term.rule.nodes
        m_vals = evaluate(term.weight, {"s": snodes})
        x_vals = np.asarray([xf(s) for s in snodes], dtype=float)
        total += float(np.dot(term.rule.weights, np.multiply(m_vals, x_vals)))
    return total


def apply_to_kernel_slices(gamma: Functional, kernel: "DiscreteKernel") -> GridFunction:
    """The grid function s |-> <gamma, K(., s)> over the master s-nodes."""
    rule = kernel.rule
    out = np.empty(rule.n)
    for j in range(rule.n):
        column = GridFunction(rule, kernel.values[:, j])
        out[j] = apply(gamma, column)
    return GridFunction(rule, out)


@dataclass(frozen=True)
class ConditionReport:
    """Per-load annihilation check: does the load send every kernel
    t-slice to zero (within tol, scaled by the kernel's magnitude)?"""

    holds: bool
    deviation: float
    tol_used: float


def check_condition_one(
    problem: "ProblemSpec", kernel: "DiscreteKernel", tol: float = 1e-10
) -> list[ConditionReport]:
    """Check, for each load, max_s |<gamma_k, K(., s)>| <= tol * (1 + max|K|)."""
    scale = 1.0 + float(np.max(np.abs(kernel.values))) if kernel.values.size else 1.0
    threshold = tol * scale
    reports = []
    for load in problem.loads:
        slice_values = apply_to_kernel_slices(load.functional, kernel).values
        deviation = float(np.max(np.abs(slice_values))) if slice_values.size else 0.0
        reports.append(
            ConditionReport(holds=deviation <= threshold, deviation=deviation, tol_used=threshold)
        )
    return reports


def functional_norm(gamma: Functional) -> float:
    """Upper bound for |<gamma, x>| / max|x|: sum|alpha_i| + sum integral|m_i|."""
    total = sum(abs(p.alpha) for p in gamma.point_terms)
    for term in gamma.integral_terms:
        m_vals = np.broadcast_to(
            np.abs(evaluate(term.weight, {"s": term.rule.nodes})), (term.rule.n,)
        )
        total += float(np.dot(term.rule.weights, m_vals))
    return float(total)
