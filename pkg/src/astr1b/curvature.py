"""Limited-memory symmetric Hessian approximations exposed as operators.

`SecantMemory` keeps at most m admitted secant pairs (s, y) and applies the
direct (non-inverse) BFGS operator built from them over the scaled identity
B0 = b0_scale * I. An empty memory is the zero operator, so a solver with
capacity 0 is purely first order. Only matrix-vector products are exposed.

Pairs are admitted only when s'y > 1e-8 ||s|| ||y||, which keeps the induced
operator symmetric positive definite and uniformly bounded without damping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SecantMemory",
    "secant_push",
    "apply_B",
    "operator_norm_bound",
    "CURVATURE_THRESHOLD",
]

CURVATURE_THRESHOLD = 1e-8


@dataclass
class SecantMemory:
    """Bounded history of admitted secant pairs and the induced operator cache."""

    capacity: int
    pairs: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    b0_scale: float = 1.0
    # per-pair cache: (b_j = B_j s_j, s_j' b_j, y_j' s_j), B_j built from pairs < j
    _cache: list[tuple[np.ndarray, float, float]] = field(default_factory=list)

    def __post_init__(self):
        if self.capacity < 0:
            raise ValueError("capacity must be nonnegative")

    def __len__(self) -> int:
        return len(self.pairs)


def _apply_cached(memory: SecantMemory, v: np.ndarray, n_pairs: int) -> np.ndarray:
    out = memory.b0_scale * v
    for j in range(n_pairs):
        s, y = memory.pairs[j]
        b, sbs, ys = memory._cache[j]
        out -= (float(b @ v) / sbs) * b
        out += (float(y @ v) / ys) * y
    return out


def _rebuild_cache(memory: SecantMemory) -> None:
    memory._cache = []
    for j, (s, y) in enumerate(memory.pairs):
        b = _apply_cached(memory, s, j)
        sbs = float(s @ b)
        ys = float(y @ s)
        memory._cache.append((b, sbs, ys))


def secant_push(memory: SecantMemory, s: np.ndarray, y: np.ndarray) -> SecantMemory:
    """Offer a pair (step, gradient difference); admit it if curved enough.

    On admission the oldest pair is evicted when over capacity and the base
    scale is reset to y'y / s'y. Rejected pairs leave the memory unchanged.
    """
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("s and y must be 1-D arrays of equal length")
    if memory.pairs and memory.pairs[0][0].shape != s.shape:
        raise ValueError("pair dimension does not match stored pairs")
    ns = math.sqrt(float(s @ s))
    if ns == 0.0:
        raise ValueError("zero step offered as secant pair")
    if memory.capacity == 0:
        return memory
    sy = float(s @ y)
    ny = math.sqrt(float(y @ y))
    if sy <= CURVATURE_THRESHOLD * ns * ny:
        return memory
    memory.pairs.append((s.copy(), y.copy()))
    if len(memory.pairs) > memory.capacity:
        memory.pairs.pop(0)
    memory.b0_scale = float(y @ y) / sy
    _rebuild_cache(memory)
    return memory


def apply_B(memory: SecantMemory, v: np.ndarray) -> np.ndarray:
    """Product B v with the current operator; the zero vector when no pairs stored."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("v must be a 1-D array")
    if not memory.pairs:
        return np.zeros_like(v)
    if v.shape != memory.pairs[0][0].shape:
        raise ValueError("v dimension does not match stored pairs")
    return _apply_cached(memory, v, len(memory.pairs))


def operator_norm_bound(memory: SecantMemory, iterations: int = 50) -> float:
    """Estimate of max(1, ||B||) by power iteration from a fixed start vector.

    The estimate is inflated by 1e-6 relative so it stays a majorant of the
    Rayleigh quotient on generic vectors.
    """
    if not memory.pairs:
        return 1.0
    n = memory.pairs[0][0].shape[0]
    v = 1.0 + 1e-3 * np.arange(n) * np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    v /= math.sqrt(float(v @ v))
    lam = 0.0
    for _ in range(iterations):
        bv = _apply_cached(memory, v, len(memory.pairs))
        norm = math.sqrt(float(bv @ bv))
        if norm == 0.0:
            return 1.0
        lam = float(v @ bv)
        v = bv / norm
    return max(1.0, abs(lam) * (1.0 + 1e-6))
