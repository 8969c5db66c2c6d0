"""Gauss-Legendre quadrature and grid functions.

This module is the single source of nodes, weights, numerical integration
and off-node evaluation for the whole package. Nodes and weights are
computed by Newton iteration on the Legendre recurrence; off-node values
come from barycentric Lagrange interpolation (second form), which is the
package's definition of "x(t) between nodes".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import DomainEvalError

__all__ = [
    "QuadratureRule",
    "GridFunction",
    "gauss_legendre",
    "composite_gauss_legendre",
    "integrate",
    "interpolate",
    "interp_weights",
]

_NEWTON_TOL = 1e-15


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and positive weights on [a, b], nodes strictly increasing."""

    a: float
    b: float
    nodes: np.ndarray
    weights: np.ndarray
    _bary: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise ValueError("nodes and weights must be 1-d and the same length")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if nodes[0] < self.a or nodes[-1] > self.b:
            raise ValueError("nodes must lie within [a, b]")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        return len(self.nodes)

    def barycentric_weights(self) -> np.ndarray:
        """Barycentric weights for the node set, normalized to unit max."""
        cached = self._bary.get("w")
        if cached is None:
            x = self.nodes
            diff = x[:, None] - x[None, :]
            np.fill_diagonal(diff, 1.0)
            # Scale pairwise differences to curb under/overflow for large n.
            scale = 4.0 / (self.b - self.a)
            w = 1.0 / np.prod(diff * scale, axis=1)
            w /= np.max(np.abs(w))
            w.setflags(write=False)
            self._bary["w"] = cached = w
        return cached


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A function known by its values at the nodes of a rule."""

    rule: QuadratureRule
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.rule.n,):
            raise ValueError("values length must match the rule's node count")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __call__(self, t: float) -> float:
        return interpolate(self, t)


def _legendre_nodes(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Roots of P_m and Gauss weights on [-1, 1] via Newton iteration."""
    if m == 1:
        return np.array([0.0]), np.array([2.0])
    k = np.arange(m)
    x = np.cos(np.pi * (k + 0.75) / (m + 0.5))
    for _ in range(100):
        p_prev = np.ones_like(x)
        p = x.copy()
        for deg in range(2, m + 1):
            p, p_prev = ((2 * deg - 1) * x * p - (deg - 1) * p_prev) / deg, p
        dp = m * (x * p - p_prev) / (x * x - 1.0)
        dx = p / dp
        x -= dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    p_prev = np.ones_like(x)
    p = x.copy()
    for deg in range(2, m + 1):
        p, p_prev = ((2 * deg - 1) * x * p - (deg - 1) * p_prev) / deg, p
    dp = m * (x * p - p_prev) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    return x[order], w[order]


def gauss_legendre(m: int, a: float, b: float) -> QuadratureRule:
    """m-point Gauss-Legendre rule on [a, b], exact through degree 2m-1."""
    if m < 1:
        raise ValueError(f"node count must be >= 1, got {m}")
    if not a < b:
        raise ValueError(f"invalid interval: a={a!r} must be < b={b!r}")
    x, w = _legendre_nodes(m)
    nodes = 0.5 * (b - a) * x + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w
    return QuadratureRule(a=float(a), b=float(b), nodes=nodes, weights=weights)


def composite_gauss_legendre(m: int, panels: int, a: float, b: float) -> QuadratureRule:
    """Gauss-Legendre with m points on each of `panels` equal subintervals.

    Gauss nodes are interior to their panels, so the stacked node set is
    strictly increasing and all rule invariants carry over. Composite
    rules are for integration; interpolation through their near-uniform
    global node set is poorly conditioned at large sizes.
    """
    if panels < 1:
        raise ValueError(f"panel count must be >= 1, got {panels}")
    if not a < b:
        raise ValueError(f"invalid interval: a={a!r} must be < b={b!r}")
    edges = np.linspace(a, b, panels + 1)
    pieces = [gauss_legendre(m, edges[i], edges[i + 1]) for i in range(panels)]
    nodes = np.concatenate([p.nodes for p in pieces])
    weights = np.concatenate([p.weights for p in pieces])
    return QuadratureRule(a=float(a), b=float(b), nodes=nodes, weights=weights)


def integrate(rule: QuadratureRule, f: Union[Callable[[float], float], GridFunction]) -> float:
    """Sum of w_i * f(t_i) over the rule's nodes."""
    if isinstance(f, GridFunction):
        if f.rule is not rule and not np.array_equal(f.rule.nodes, rule.nodes):
            raise ValueError("grid function is sampled on a different rule")
        values = f.values
    else:
        values = np.asarray([f(t) for t in rule.nodes], dtype=float)
        if not np.all(np.isfinite(values)):
            bad = rule.nodes[~np.isfinite(values)][0]
            raise DomainEvalError(
                f"integrand is non-finite at node t={bad!r}", f"t={bad!r}"
            )
    return float(np.dot(rule.weights, values))


def interp_weights(rule: QuadratureRule, t: float) -> np.ndarray:
    """Row vector L with L @ values = interpolated value at t.

    Barycentric second form; exact node hits return a unit row.
    """
    if t < rule.a or t > rule.b:
        raise ValueError(f"t={t!r} outside the interval [{rule.a!r}, {rule.b!r}]")
    x = rule.nodes
    row = np.zeros(rule.n)
    hit = np.nonzero(x == t)[0]
    if hit.size:
        row[hit[0]] = 1.0
        return row
    w = rule.barycentric_weights()
    ratios = w / (t - x)
    row = ratios / np.sum(ratios)
    return row


def interpolate(g: GridFunction, t: float) -> float:
    """Barycentric Lagrange interpolation of g through all its nodes."""
    row = interp_weights(g.rule, t)
    return float(np.dot(row, g.values))
