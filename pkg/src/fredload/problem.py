"""Problem container: interval, kernel, source, and the loads.

A problem is the data of

    x(t) - sum_k a_k(t) <gamma_k, x> - lambda * integral K(t,s) x(s) ds = f(t)

on [a, b], with n >= 1 loads (a_k, gamma_k). lambda is supplied at solve
time; everything else lives here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import Expr, evaluate
from .functionals import Functional
from .quadrature import QuadratureRule, gauss_legendre

__all__ = ["Load", "ProblemSpec"]


@dataclass(frozen=True)
class Load:
    """One load term: coefficient function a_k(t) and functional gamma_k."""

    coeff: Expr
    functional: Functional


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    a: float
    b: float
    kernel: Expr
    source: Expr
    loads: tuple[Load, ...]

    def __post_init__(self):
        object.__setattr__(self, "loads", tuple(self.loads))
        if not self.a < self.b:
            raise ValueError(f"invalid interval: a={self.a!r} must be < b={self.b!r}")
        if not self.loads:
            raise ValueError("a problem needs at least one load")
        if not self.kernel.variables <= {"t", "s"}:
            raise ValueError("kernel may only use variables t and s")
        if not self.source.variables <= {"t"}:
            raise ValueError("source may only use variable t")
        for k, load in enumerate(self.loads, start=1):
            if not load.coeff.variables <= {"t"}:
                raise ValueError(f"load {k}: coefficient may only use variable t")
            for p in load.functional.point_terms:
                if not self.a <= p.t0 <= self.b:
                    raise ValueError(
                        f"load {k}: point term at t={p.t0!r} outside [{self.a}, {self.b}]"
                    )
            for term in load.functional.integral_terms:
                if term.lower < self.a or term.upper > self.b:
                    raise ValueError(
                        f"load {k}: integral term [{term.lower}, {term.upper}] "
                        f"outside [{self.a}, {self.b}]"
                    )

    @property
    def n(self) -> int:
        return len(self.loads)

    def master_rule(self, nodes: int = 64) -> QuadratureRule:
        return gauss_legendre(nodes, self.a, self.b)

    def source_values(self, rule: QuadratureRule) -> np.ndarray:
        """f sampled at the rule's nodes."""
        vals = evaluate(self.source, {"t": rule.nodes})
        return np.broadcast_to(np.asarray(vals, dtype=float), (rule.n,)).copy()

    def coeff_values(self, rule: QuadratureRule) -> np.ndarray:
        """N x n matrix with column k = a_k sampled at the rule's nodes."""
        out = np.empty((rule.n, self.n))
        for k, load in enumerate(self.loads):
            vals = evaluate(load.coeff, {"t": rule.nodes})
            out[:, k] = np.broadcast_to(np.asarray(vals, dtype=float), (rule.n,))
        return out
