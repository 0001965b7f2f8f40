"""First-order criticality measure for box constraints.

For a feasible x, the componentwise measure is

    chi_i(x, alpha) = delta_i(x, alpha) * |g_i(x)|,

where delta_i is the largest step length in [0, alpha] along the descent
coordinate direction -sign(g_i) e_i that keeps x feasible. The aggregate
measure sqrt(sum_i chi_i^2) generalizes the gradient norm: it equals
||g(x)|| whenever the bounds are further than alpha away, and vanishes
exactly at first-order critical points of the box-constrained problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .oracle import Bounds, InfeasiblePointError

__all__ = ["ChiVector", "delta_feasible", "chi", "criticality_norm"]


@dataclass
class ChiVector:
    """Componentwise criticality values chi_i >= 0 at radius alpha."""

    values: np.ndarray
    alpha: float = 1.0


def delta_feasible(x_i: float, l_i: float, u_i: float, g_i: float, alpha: float) -> float:
    """Feasible step length along -sign(g_i) within radius alpha (scalar form)."""
    if alpha < 0.0:
        raise ValueError("alpha must be nonnegative")
    if g_i > 0.0:
        return min(alpha, x_i - l_i)
    if g_i < 0.0:
        return min(alpha, u_i - x_i)
    return 0.0


def chi(x: np.ndarray, g: np.ndarray, bounds: Bounds, alpha: float = 1.0) -> ChiVector:
    """Componentwise criticality chi_i = delta_i(alpha) * |g_i| at a feasible x."""
    if alpha < 0.0:
        raise ValueError("alpha must be nonnegative")
    x = np.ascontiguousarray(x, dtype=float)
    g = np.ascontiguousarray(g, dtype=float)
    if x.shape != g.shape or x.shape != (bounds.n,):
        raise ValueError("x, g and bounds must have equal length")
    if not bounds.contains(x):
        raise InfeasiblePointError("chi requires a feasible point")
    out = np.empty_like(x)
    kernels.chi_measure(x, g, bounds.lower, bounds.upper, alpha, out)
    return ChiVector(values=out, alpha=alpha)


def criticality_norm(chi_vec: ChiVector) -> float:
    """Euclidean norm of the chi vector; zero iff exactly first-order critical."""
    v = chi_vec.values
    return math.sqrt(float(np.dot(v, v)))
