"""Per-coordinate weight schemes controlling the trust-region radii.

Two families:

* ``adagrad``: w_{i,k} = sqrt(sigma + sum_{j<=k} chi_{i,j}^2), the
  accumulated-square scheme; nondecreasing in k with floor sqrt(sigma).
* ``maxchi``: w_{i,k} = max(sigma, v_{i,k}) * (k+1)^nu with
  v_{i,k} = max_{j<=k} chi_{i,j}, the diminishing-stepsize scheme; the
  companion exponent mu (nu <= mu < 1) only enters the complexity
  constants.

Both schemes are bounded below by a strictly positive floor, which
`weight_floor` reports for the theory checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .criticality import ChiVector

__all__ = ["WeightState", "weights_init", "weights_update", "weight_floor", "SCHEMES"]

SCHEMES = ("adagrad", "maxchi")


@dataclass
class WeightState:
    """Mutable per-run accumulator state for one weight scheme."""

    scheme: str
    sigma: float
    theta: float = 1.0
    nu: float = 0.1
    mu: float = 0.1
    n: int = 0
    k: int = -1
    accum: np.ndarray = field(default_factory=lambda: np.zeros(0))


def weights_init(
    scheme: str,
    sigma: float,
    theta: float = 1.0,
    nu: float = 0.1,
    mu: float = 0.1,
    n: int = 1,
) -> WeightState:
    """Fresh state before any chi has been observed (k = -1, accumulator zero)."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown weight scheme {scheme!r}")
    if not 0.0 < sigma <= 1.0:
        raise ValueError("sigma must lie in (0, 1]")
    if not 0.0 < theta <= 1.0:
        raise ValueError("theta must lie in (0, 1]")
    if scheme == "maxchi" and not 0.0 < nu <= mu < 1.0:
        raise ValueError("maxchi requires 0 < nu <= mu < 1")
    if n < 1:
        raise ValueError("n must be positive")
    return WeightState(
        scheme=scheme, sigma=sigma, theta=theta, nu=nu, mu=mu, n=n, accum=np.zeros(n)
    )


def weights_update(state: WeightState, chi_k: ChiVector, k: int | None = None) -> np.ndarray:
    """Fold iteration k's chi into the state and return the weights w_{.,k}.

    Must be called once per iteration in order; passing the explicit
    iteration index `k` asserts the ordering.
    """
    values = chi_k.values
    if values.shape != (state.n,):
        raise ValueError("chi vector length does not match state dimension")
    if k is not None and k != state.k + 1:
        raise ValueError(f"out-of-order weight update: expected k={state.k + 1}, got {k}")
    state.k += 1
    w = np.empty(state.n)
    if state.scheme == "adagrad":
        kernels.adagrad_weights(state.accum, values, state.sigma, w)
    else:
        scale = float(state.k + 1) ** state.nu
        kernels.maxchi_weights(state.accum, values, state.sigma, scale, w)
    return w


def weight_floor(state: WeightState) -> float:
    """Provable lower bound on every weight the state can emit."""
    if state.scheme == "adagrad":
        return float(np.sqrt(state.sigma))
    return state.sigma
