"""Optimization-problem abstraction: bounds, oracles, and the noise wrapper.

A `Problem` owns a differentiable objective oracle ``x -> (f(x), g(x))``
together with componentwise bounds. `evaluate` is the single gateway all
solvers use; it enforces feasibility of the query point, tracks evaluation
counts per quantity, and rejects non-finite oracle output. `add_noise`
applies relative Gaussian perturbations, reproducible per
``(seed, stream_id, call index)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Bounds",
    "Problem",
    "OracleResult",
    "NoiseSpec",
    "NoiseStream",
    "EvalCounts",
    "InfeasiblePointError",
    "OracleFailureError",
    "evaluate",
    "add_noise",
]


class InfeasiblePointError(ValueError):
    """Raised when an oracle is queried outside the feasible box."""


class OracleFailureError(ArithmeticError):
    """Raised when an oracle returns non-finite output; carries the query point."""

    def __init__(self, message: str, x: np.ndarray):
        super().__init__(message)
        self.x = np.array(x)


def _readonly(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass
class Bounds:
    """Componentwise box ``lower_i <= x_i <= upper_i``; +-inf entries allowed."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.lower = _readonly(self.lower)
        self.upper = _readonly(self.upper)
        if self.lower.ndim != 1 or self.lower.shape != self.upper.shape:
            raise ValueError("lower and upper must be 1-D arrays of equal length")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise ValueError("bounds may not contain NaN")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def n(self) -> int:
        return self.lower.shape[0]

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    @classmethod
    def unbounded(cls, n: int) -> "Bounds":
        return cls(np.full(n, -np.inf), np.full(n, np.inf))


@dataclass
class Problem:
    """A bound-constrained minimization problem with a first-order oracle.

    ``oracle(x)`` must return ``(f(x), g(x))`` with ``g`` of length ``dim``.
    ``known_lipschitz`` and ``known_flow`` are optional certified constants
    (a gradient-Lipschitz bound valid on the feasible box, and a lower bound
    on f over the box) used by the complexity checks.
    """

    name: str
    dim: int
    bounds: Bounds
    oracle: Callable[[np.ndarray], tuple[float, np.ndarray]]
    x0: np.ndarray
    known_lipschitz: Optional[float] = None
    known_flow: Optional[float] = None

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if self.bounds.n != self.dim:
            raise ValueError("bounds length does not match dim")
        self.x0 = _readonly(self.x0)
        if self.x0.shape != (self.dim,):
            raise ValueError("x0 length does not match dim")
        if not self.bounds.contains(self.x0):
            raise ValueError("x0 is infeasible")
        if self.known_lipschitz is not None and self.known_lipschitz <= 0:
            raise ValueError("known_lipschitz must be positive")


class EvalCounts:
    """Mutable per-run evaluation counters (objective, gradient)."""

    __slots__ = ("n_f", "n_g")

    def __init__(self):
        self.n_f = 0
        self.n_g = 0

    def as_tuple(self) -> tuple[int, int]:
        return (self.n_f, self.n_g)


@dataclass
class OracleResult:
    """Outcome of one oracle query; absent quantities are None."""

    f_value: Optional[float] = None
    gradient: Optional[np.ndarray] = None
    eval_counts: tuple[int, int] = (0, 0)


def evaluate(
    problem: Problem,
    x: np.ndarray,
    want_f: bool = False,
    want_g: bool = False,
    counts: Optional[EvalCounts] = None,
) -> OracleResult:
    """Query the oracle at a feasible point for the requested quantities.

    Counters are incremented only for requested quantities. Raises
    `InfeasiblePointError` for x outside the box and `OracleFailureError`
    (carrying x) when the oracle returns non-finite output.
    """
    if not (want_f or want_g):
        raise ValueError("at least one of want_f, want_g must be set")
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.dim,):
        raise ValueError(f"x has shape {x.shape}, expected ({problem.dim},)")
    if not problem.bounds.contains(x):
        raise InfeasiblePointError(f"point is outside the feasible box of {problem.name}")

    f, g = problem.oracle(x)
    if counts is None:
        counts = EvalCounts()

    result = OracleResult()
    if want_f:
        f = float(f)
        if not np.isfinite(f):
            raise OracleFailureError(f"non-finite objective value from {problem.name}", x)
        counts.n_f += 1
        result.f_value = f
    if want_g:
        g = np.asarray(g, dtype=float)
        if g.shape != (problem.dim,):
            raise ValueError("oracle returned gradient of wrong length")
        if not np.all(np.isfinite(g)):
            raise OracleFailureError(f"non-finite gradient from {problem.name}", x)
        counts.n_g += 1
        result.gradient = g
    result.eval_counts = counts.as_tuple()
    return result


@dataclass(frozen=True)
class NoiseSpec:
    """Relative Gaussian noise configuration.

    ``level`` is the relative standard deviation; 0 disables the wrapper.
    ``stream_id`` separates independent streams (objective vs gradient
    draws) derived from the same seed.
    """

    level: float = 0.0
    seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        if not 0.0 <= self.level <= 1.0:
            raise ValueError("noise level must lie in [0, 1]")

    def for_stream(self, stream_id: int) -> "NoiseSpec":
        return NoiseSpec(self.level, self.seed, stream_id)


class NoiseStream:
    """Counter-based normal variate stream.

    Draw ``k`` at call index ``c`` is a pure function of
    ``(seed, stream_id, c)``: each call uses a Philox generator keyed by
    (seed, stream_id) with its 256-bit counter offset by ``c * 2**128``,
    so replays and out-of-order queries agree bit for bit.
    """

    def __init__(self, spec: NoiseSpec):
        self.spec = spec
        self._key = np.random.SeedSequence([spec.seed, spec.stream_id]).generate_state(
            2, np.uint64
        )
        self.call_index = 0

    def normals_at(self, call_index: int, count: int) -> np.ndarray:
        bg = np.random.Philox(key=self._key, counter=call_index << 128)
        return np.random.Generator(bg).standard_normal(count)

    def normals(self, count: int) -> np.ndarray:
        z = self.normals_at(self.call_index, count)
        self.call_index += 1
        return z


def add_noise(result: OracleResult, stream: NoiseStream) -> OracleResult:
    """Multiply each present quantity by (1 + level * z), z standard normal.

    The objective uses one shared draw; gradient components use independent
    draws. With level 0 the input is returned unchanged. Each perturbed
    quantity consumes one call index on the stream.
    """
    level = stream.spec.level
    if level == 0.0:
        return result
    out = OracleResult(eval_counts=result.eval_counts)
    if result.f_value is not None:
        z = stream.normals(1)[0]
        out.f_value = result.f_value * (1.0 + level * z)
    if result.gradient is not None:
        z = stream.normals(result.gradient.shape[0])
        out.gradient = result.gradient * (1.0 + level * z)
    return out
