"""Complexity constants and bound verification against recorded runs.

Implements the negative branch W_-1 of the Lambert function (Halley
iteration started from a closed-form envelope), the accumulated-square
complexity constant kappa_adag whose third term involves W_-1, the
diminishing-scheme constants (j_eta, kappa_diamond), and checkers that
replay a run's per-iteration criticality history against the proved decay
bounds. Violations of these bounds indicate an implementation bug, never an
unlucky problem.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .oracle import Problem
from .solvers import RunRecord, SolverConfig

__all__ = [
    "TheoryParams",
    "UnknownConstantsError",
    "BoundReport",
    "lambert_w_minus1",
    "kappa_adag",
    "check_adagrad_rate",
    "check_series_lemma",
    "diminishing_constants",
    "check_diminishing_rate",
    "stop_iteration_bound",
    "theory_params_for",
]

_BRANCH_POINT = -math.exp(-1.0)


class UnknownConstantsError(ValueError):
    """Raised when a problem lacks the certified constants a check needs."""


@dataclass
class TheoryParams:
    """Problem and algorithm constants entering the complexity bounds."""

    n: int
    L: float
    kappa_B: float = 1.0
    Gamma0: float = 0.0
    sigma: float = 0.01
    theta: float = 1.0
    tau: float = 1.0
    nu: float = 0.1
    mu: float = 0.1
    eta: Optional[float] = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.L < 0:
            raise ValueError("L must be nonnegative")
        if self.kappa_B < 1.0:
            raise ValueError("kappa_B must be >= 1")
        if self.Gamma0 < 0:
            raise ValueError("Gamma0 must be nonnegative")
        for name in ("sigma", "theta", "tau"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1]")


def lambert_w_minus1(z: float) -> float:
    """W_-1(z) for z in [-1/e, 0): the root w <= -1 of w e^w = z.

    Halley iteration initialized from the closed-form envelope
    -(log(1/|z|) + sqrt(2 (log(1/|z|) - 1))); a branch-point series is used
    when z is within ~1e-8 of -1/e.
    """
    if not _BRANCH_POINT <= z < 0.0:
        raise ValueError(f"z={z} outside the domain [-1/e, 0) of W_-1")
    if z == _BRANCH_POINT:
        return -1.0

    lam = -math.log(-z)  # = log(1/|z|) >= 1 on the domain
    if lam - 1.0 < 1e-8:
        p = math.sqrt(2.0 * (1.0 + math.e * z))
        w = -1.0 - p - p * p / 3.0 - 11.0 * p**3 / 72.0
    else:
        w = -(lam + math.sqrt(2.0 * (lam - 1.0)))

    best = w
    best_res = abs(w * math.exp(w) - z)
    for _ in range(80):
        ew = math.exp(w)
        f = w * ew - z
        if abs(f) <= 1e-14 * abs(z):
            return w
        fp = ew * (w + 1.0)
        fpp = ew * (w + 2.0)
        denom = 2.0 * fp * fp - f * fpp
        if denom == 0.0:
            break
        w_new = w - 2.0 * f * fp / denom
        if not math.isfinite(w_new) or w_new >= -1.0:
            # fall back to a damped Newton step staying on the branch
            w_new = min(-1.0, w - f / fp) if fp != 0.0 else w
        res = abs(w_new * math.exp(w_new) - z)
        if res < best_res:
            best, best_res = w_new, res
        if w_new == w:
            break
        w = w_new
    return best


@dataclass
class KappaAdag:
    """The accumulated-square complexity constant and its three candidate terms."""

    value: float
    term_floor: float
    term_exp: float
    term_lambert: float


def kappa_adag(params: TheoryParams) -> KappaAdag:
    """max of sigma, the exponential term, and the Lambert-squared term."""
    n, l, kb = params.n, params.L, params.kappa_B
    sg, th, ta = params.sigma, params.theta, params.tau
    t1 = sg
    t2 = 0.5 * math.exp(2.0 * params.Gamma0 * th / (n * (kb + l)))
    a = 8.0 * n * kb * (kb + l) / (ta * th**2.5)
    z = -sg / a
    w = lambert_w_minus1(z)
    t3 = (1.0 / (2.0 * sg)) * a * a * w * w
    return KappaAdag(value=max(t1, t2, t3), term_floor=t1, term_exp=t2, term_lambert=t3)


@dataclass
class BoundReport:
    """Outcome of replaying a decay bound against a run's history."""

    kind: str
    ok: bool
    bound: float
    n_checked: int
    first_violation: Optional[int] = None
    worst_margin: float = math.inf  # min over checked k of (bound_k - lhs_k)
    extras: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        out = asdict(self)
        for key, val in out.items():
            if isinstance(val, float) and not math.isfinite(val):
                out[key] = None
        return out


def _chi_sq_history(record: RunRecord) -> np.ndarray:
    if record.log is None or not record.log.get("chi_sq"):
        raise ValueError("record has no per-iteration criticality history")
    return np.asarray(record.log["chi_sq"], dtype=float)


def check_adagrad_rate(record: RunRecord, params: TheoryParams) -> BoundReport:
    """Accumulated-square bound: sum_{j<=k} sum_i chi_{i,j}^2 <= kappa_adag for all k."""
    chi_sq = _chi_sq_history(record)
    kappa = kappa_adag(params)
    cumulative = np.cumsum(chi_sq)
    margin = kappa.value - cumulative
    bad = np.flatnonzero(margin < 0.0)
    return BoundReport(
        kind="adagrad-rate",
        ok=bad.size == 0,
        bound=kappa.value,
        n_checked=int(cumulative.size),
        first_violation=int(bad[0]) if bad.size else None,
        worst_margin=float(np.min(margin)),
        extras={
            "term_floor": kappa.term_floor,
            "term_exp": kappa.term_exp,
            "term_lambert": kappa.term_lambert,
            "final_cumulative": float(cumulative[-1]),
        },
    )


def check_series_lemma(a, xi: float) -> bool:
    """Prefix inequality sum_{j<=k} a_j/(xi+b_j) <= log((xi+b_k)/xi), b_j = sum_{l<=j} a_l."""
    a = np.asarray(a, dtype=float)
    if np.any(a < 0.0):
        raise ValueError("sequence entries must be nonnegative")
    if xi <= 0.0:
        raise ValueError("xi must be positive")
    if a.size == 0:
        return True
    b = np.cumsum(a)
    lhs = np.cumsum(a / (xi + b))
    rhs = np.log1p(b / xi)
    return bool(np.all(lhs <= rhs))


def diminishing_constants(params: TheoryParams) -> tuple[float, float]:
    """(j_eta, kappa_diamond) for the diminishing-stepsize scheme.

    j_eta = (kappa_B (kappa_B + L) / (sigma_min (tau sigma_min - eta)))^(1/nu);
    kappa_diamond = 2 (j_eta + 1) (4 kappa_B / eta)
                    (Gamma0 + n kappa_B (kappa_B + L) j_eta / theta),
    where sigma_min is the weight floor (= sigma for the running-max scheme).
    """
    if params.eta is None:
        raise ValueError("params.eta is required for the diminishing-scheme constants")
    sigma_min = params.sigma
    limit = params.tau * params.theta * sigma_min
    if not 0.0 < params.eta < limit:
        raise ValueError(f"eta must lie in (0, {limit})")
    kb, l = params.kappa_B, params.L
    j_eta = (kb * (kb + l) / (sigma_min * (params.tau * sigma_min - params.eta))) ** (
        1.0 / params.nu
    )
    kappa_diamond = (
        2.0
        * (j_eta + 1.0)
        * (4.0 * kb / params.eta)
        * (params.Gamma0 + params.n * kb * (kb + l) * j_eta / params.theta)
    )
    return j_eta, kappa_diamond


def check_diminishing_rate(record: RunRecord, params: TheoryParams) -> BoundReport:
    """Running-min bound: min_{j<=k} sum_i chi_{i,j}^2 <= 2 kappa_diamond (j_eta+1) / k^(1-mu)
    for every k > j_eta. Iterations at or below j_eta are outside the theorem's scope.
    """
    chi_sq = _chi_sq_history(record)
    j_eta, kappa_diamond = diminishing_constants(params)
    running_min = np.minimum.accumulate(chi_sq)
    ks = np.arange(chi_sq.size, dtype=float)
    mask = ks > j_eta
    n_checked = int(np.count_nonzero(mask))
    if n_checked == 0:
        return BoundReport(
            kind="diminishing-rate",
            ok=True,
            bound=math.inf,
            n_checked=0,
            extras={"j_eta": j_eta, "kappa_diamond": kappa_diamond, "vacuous": True},
        )
    bound_k = 2.0 * kappa_diamond * (j_eta + 1.0) / ks[mask] ** (1.0 - params.mu)
    margin = bound_k - running_min[mask]
    bad = np.flatnonzero(margin < 0.0)
    checked_idx = np.flatnonzero(mask)
    return BoundReport(
        kind="diminishing-rate",
        ok=bad.size == 0,
        bound=float(bound_k[-1]),
        n_checked=n_checked,
        first_violation=int(checked_idx[bad[0]]) if bad.size else None,
        worst_margin=float(np.min(margin)),
        extras={"j_eta": j_eta, "kappa_diamond": kappa_diamond, "vacuous": False},
    )


def stop_iteration_bound(kappa: float, epsilon: float) -> float:
    """Worst-case iteration index by which the epsilon-criticality test must fire."""
    if kappa <= 0.0 or epsilon <= 0.0:
        raise ValueError("kappa and epsilon must be positive")
    return kappa * kappa / (epsilon * epsilon)


def theory_params_for(
    problem: Problem,
    config: SolverConfig,
    kappa_B: float = 1.0,
    eta: Optional[float] = None,
) -> TheoryParams:
    """Assemble TheoryParams from a problem's certified constants.

    f(x0) is evaluated here, outside any solver run, so the gap
    Gamma0 = f(x0) - f_low never touches the solver's evaluation counters.
    Raises UnknownConstantsError when the problem lacks L or f_low.
    """
    if problem.known_lipschitz is None or problem.known_flow is None:
        raise UnknownConstantsError(
            f"problem {problem.name!r} lacks certified Lipschitz/lower-bound constants"
        )
    f0, _ = problem.oracle(problem.x0)
    gamma0 = max(0.0, float(f0) - problem.known_flow)
    if eta is None and config.weight_scheme == "maxchi":
        eta = 0.5 * config.tau * config.theta * config.sigma
    return TheoryParams(
        n=problem.dim,
        L=problem.known_lipschitz,
        kappa_B=kappa_B,
        Gamma0=gamma0,
        sigma=config.sigma,
        theta=config.theta,
        tau=config.tau,
        nu=config.nu,
        mu=config.mu,
        eta=eta,
    )
