"""Operator-level computations on the kernel K(t,s).

Everything here works on the Nystrom discretization: an N x N sample of
the kernel on the master rule, with the diagonal weight matrix W turning
matrix products into quadrature approximations of operator composition.
The resolvent G(t,s,lambda) of (I - lambda K)^{-1} = I + lambda * G[.] is
obtained by a dense solve per lambda; the determinant of the discretized
operator stands in for the Fredholm denominator when locating
characteristic numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CharacteristicNumberError
from .expr import Expr, evaluate
from .quadrature import GridFunction, QuadratureRule

__all__ = [
    "DiscreteKernel",
    "IteratedKernels",
    "ResolventData",
    "discretize",
    "iterate_kernels",
    "nilpotency_index",
    "operator_norm",
    "resolvent",
    "resolvent_apply",
    "find_characteristic_numbers",
    "det_magnitude",
    "DET_PROXIMITY_TOL",
]

# |det(I - lambda K W)| at or below this counts as "at a characteristic number".
DET_PROXIMITY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class DiscreteKernel:
    """Kernel sampled at node pairs: values[i, j] = K(t_i, s_j)."""

    rule: QuadratureRule
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        n = self.rule.n
        if values.shape != (n, n):
            raise ValueError(f"kernel matrix must be {n} x {n}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("kernel values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def system_matrix(self, lam: float) -> np.ndarray:
        """I - lambda * K * W for the rule's weights W."""
        return np.eye(self.rule.n) - lam * (self.values * self.rule.weights)


@dataclass(frozen=True, eq=False)
class IteratedKernels:
    """Composition kernels K_1..K_M, K_n = K (W K)^{n-1} on the grid."""

    rule: QuadratureRule
    kernels: tuple[np.ndarray, ...]

    @property
    def depth(self) -> int:
        return len(self.kernels)

    def kernel(self, n: int) -> np.ndarray:
        """K_n for 1 <= n <= depth."""
        return self.kernels[n - 1]


@dataclass(frozen=True, eq=False)
class ResolventData:
    """The resolvent kernel sampled on the grid at one lambda, plus the
    signed log-determinant of I - lambda K W."""

    lam: float
    gamma: np.ndarray
    det_sign: float
    det_log: float

    @property
    def det_value(self) -> float:
        try:
            return self.det_sign * math.exp(self.det_log)
        except OverflowError:
            return self.det_sign * math.inf


def discretize(kernel: Expr, rule: QuadratureRule) -> DiscreteKernel:
    """Sample K(t,s) at all node pairs of the rule."""
    t = rule.nodes[:, None]
    s = rule.nodes[None, :]
    values = evaluate(kernel, {"t": t, "s": s})
    values = np.broadcast_to(np.asarray(values, dtype=float), (rule.n, rule.n)).copy()
    return DiscreteKernel(rule=rule, values=values)


def iterate_kernels(kernel: DiscreteKernel, depth: int) -> IteratedKernels:
    """Compute K_1..K_depth by repeated weighted composition."""
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    out = [kernel.values]
    for _ in range(depth - 1):
        out.append(kernel.values @ (kernel.rule.weights[:, None] * out[-1]))
    return IteratedKernels(rule=kernel.rule, kernels=tuple(out))


_COLLAPSE_RATIO = 1e-6


def nilpotency_index(iterated: IteratedKernels, tol: float = 1e-10) -> Optional[int]:
    """Smallest p with K_{p+1} negligible but K_p not; None if no such p
    within the computed depth. A null kernel reports p = 0.

    Negligible means below tol * (1 + max|K_1|) AND a collapse of at least
    six orders of magnitude against K_p: a merely contractive kernel also
    drives max|K_m| under any fixed threshold eventually, but by a bounded
    per-step ratio, whereas true annihilation drops to the roundoff floor.
    All later computed iterates must stay negligible as well.
    """
    k1 = iterated.kernel(1)
    threshold = tol * (1.0 + float(np.max(np.abs(k1))))
    mags = [float(np.max(np.abs(k))) for k in iterated.kernels]
    if mags[0] <= threshold:
        return 0
    for p in range(1, iterated.depth):
        if (
            mags[p] <= threshold
            and mags[p - 1] > threshold
            and mags[p] <= _COLLAPSE_RATIO * mags[p - 1]
            and all(m <= threshold for m in mags[p:])
        ):
            return p
    return None


def operator_norm(kernel: DiscreteKernel) -> float:
    """Discrete sup-norm of the integral operator: max_i sum_j w_j |K_ij|."""
    if kernel.rule.n == 0:
        return 0.0
    return float(np.max(np.abs(kernel.values) @ kernel.rule.weights))


def _slogdet_or_raise(kernel: DiscreteKernel, lam: float) -> tuple[np.ndarray, float, float]:
    system = kernel.system_matrix(lam)
    sign, logdet = np.linalg.slogdet(system)
    if sign == 0:
        raise CharacteristicNumberError(lam, 0.0)
    if logdet <= math.log(DET_PROXIMITY_TOL):
        raise CharacteristicNumberError(lam, math.exp(logdet))
    return system, float(sign), float(logdet)


def resolvent(kernel: DiscreteKernel, lam: float) -> ResolventData:
    """Resolvent kernel G = (I - lambda K W)^{-1} K by dense solve.

    Satisfies (I - lambda K W)(I + lambda G W) = I and, for small
    |lambda| * norm, the iterated-kernel series G = sum lambda^{n-1} K_n.
    """
    system, sign, logdet = _slogdet_or_raise(kernel, lam)
    gamma = np.linalg.solve(system, kernel.values)
    return ResolventData(lam=lam, gamma=gamma, det_sign=sign, det_log=logdet)


def resolvent_apply(kernel: DiscreteKernel, lam: float, g: GridFunction) -> GridFunction:
    """Solve (I - lambda K W) y = g on the grid; y = g + lambda * G W g."""
    system, _, _ = _slogdet_or_raise(kernel, lam)
    y = np.linalg.solve(system, g.values)
    return GridFunction(kernel.rule, y)


def _det_sign_log(kernel: DiscreteKernel, lam: float) -> tuple[float, float]:
    sign, logdet = np.linalg.slogdet(kernel.system_matrix(lam))
    return float(sign), float(logdet)


def det_magnitude(kernel: DiscreteKernel, lam: float) -> float:
    """|det(I - lambda K W)|, the discrete stand-in for the Fredholm
    denominator's magnitude at lambda."""
    sign, logdet = _det_sign_log(kernel, lam)
    if sign == 0.0:
        return 0.0
    try:
        return math.exp(logdet)
    except OverflowError:
        return math.inf


def find_characteristic_numbers(
    kernel: DiscreteKernel,
    lam_min: float,
    lam_max: float,
    scan_points: int = 512,
    refine_tol: float = 1e-10,
) -> list[float]:
    """Locate zeros of det(I - lambda K W) in [lam_min, lam_max].

    Scans a uniform grid for sign changes and refines each bracket by
    bisection; even-multiplicity zeros produce no sign change and are
    missed. Returns sorted estimates (possibly empty).
    """
    if not lam_min < lam_max:
        raise ValueError("need lam_min < lam_max")
    if scan_points < 2:
        raise ValueError("need at least 2 scan points")
    grid = np.linspace(lam_min, lam_max, scan_points)
    signs = np.empty(scan_points)
    for i, lam in enumerate(grid):
        signs[i], _ = _det_sign_log(kernel, lam)
    roots = []
    for i in range(scan_points - 1):
        s_left, s_right = signs[i], signs[i + 1]
        if s_left == 0.0:
            roots.append(float(grid[i]))
            continue
        if s_left * s_right >= 0:
            continue
        lo, hi = float(grid[i]), float(grid[i + 1])
        while hi - lo > refine_tol:
            mid = 0.5 * (lo + hi)
            s_mid, _ = _det_sign_log(kernel, mid)
            if s_mid == 0.0:
                lo = hi = mid
                break
            if s_mid == s_left:
                lo = mid
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    if signs[-1] == 0.0:
        roots.append(float(grid[-1]))
    return sorted(roots)
