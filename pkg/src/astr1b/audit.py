"""Online invariant auditing of solver runs.

`RunAuditor` is an observer passed to `solve`; after each step it verifies
the structural guarantees of the iteration:

* every iterate stays in the feasible box (exact);
* the step respects the componentwise radii;
* the step achieves at least the tau fraction of the Cauchy point's model
  decrease;
* the linear-step decrease bounds |g_i s^L_i| >= min(chi_i^2/w_i, chi_i)
  and |g's^L| >= floor ||s^L||^2 (weighted runs);
* the Cauchy point's decrease bound against |g's^L|;
* optionally the per-iteration descent inequality on f, which the auditor
  evaluates itself so the solver's objective-evaluation count is untouched.

Violations accumulate as signed "worst slack" values: a nonpositive worst
value means the invariant held everywhere (up to the stated tolerance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curvature import apply_B, operator_norm_bound
from .oracle import Problem
from .solvers import IterationState, SolverConfig
from .step import model_value
from .weights import weight_floor, weights_init

__all__ = ["AuditReport", "RunAuditor"]


@dataclass
class AuditReport:
    """Worst observed slack per invariant; <= 0 means the invariant held."""

    iterations: int = 0
    infeasible_count: int = 0
    worst_sbound: float = -math.inf  # max_i |s_i| - Delta_i - tol
    worst_gcp: float = -math.inf  # model(s) - tau model(s^Q) - tol
    worst_ldsl: float = -math.inf  # min(chi^2/w, chi) - |g_i s^L_i| - tol
    worst_ldsl2: float = -math.inf  # floor ||s^L||^2 - |g's^L| - tol
    worst_gcp_decrease: float = -math.inf  # model(s^Q) + floor/(2 kB) |g's^L| - tol
    worst_descent: float = -math.inf  # f(x+) - descent bound - tol
    kappa_B: float = 1.0

    @property
    def ok(self) -> bool:
        worsts = (
            self.worst_sbound,
            self.worst_gcp,
            self.worst_ldsl,
            self.worst_ldsl2,
            self.worst_gcp_decrease,
            self.worst_descent,
        )
        return self.infeasible_count == 0 and all(w <= 0.0 for w in worsts)


@dataclass
class RunAuditor:
    """Observer verifying step invariants; attach via solve(..., observer=auditor)."""

    problem: Problem
    config: SolverConfig
    check_descent: bool = False
    tol_step: float = 1e-10
    tol_descent_rel: float = 1e-8
    report: AuditReport = field(default_factory=AuditReport)
    _f_cache: float | None = None

    def __post_init__(self):
        state = weights_init(
            self.config.weight_scheme,
            self.config.sigma,
            self.config.theta,
            self.config.nu,
            self.config.mu,
            self.problem.dim,
        )
        self._floor = weight_floor(state)

    def _f(self, x: np.ndarray) -> float:
        return float(self.problem.oracle(x)[0])

    def __call__(self, it: IterationState) -> None:
        rep = self.report
        rep.iterations += 1
        bounds = self.problem.bounds
        bundle = it.bundle

        if not bounds.contains(it.x) or (it.x_next is not None and not bounds.contains(it.x_next)):
            rep.infeasible_count += 1

        s = bundle.s_final
        rep.worst_sbound = max(
            rep.worst_sbound,
            float(np.max(np.abs(s) - bundle.radii)) - self.tol_step,
        )

        b_op = None
        if it.memory is not None and len(it.memory) > 0:
            memory = it.memory
            b_op = lambda v: apply_B(memory, v)
            rep.kappa_B = max(rep.kappa_B, operator_norm_bound(memory))

        m_final = model_value(it.g, b_op, s)
        m_quad = model_value(it.g, b_op, bundle.s_quadratic)
        rep.worst_gcp = max(
            rep.worst_gcp, m_final - self.config.tau * m_quad - self.tol_step
        )

        gsl = it.g * bundle.s_linear
        abs_gsl = float(np.sum(np.abs(gsl)))
        sl_sq = float(bundle.s_linear @ bundle.s_linear)

        if it.w is not None:
            chi_v = it.chi_vec.values
            lhs = np.minimum(chi_v * chi_v / it.w, chi_v)
            rep.worst_ldsl = max(
                rep.worst_ldsl, float(np.max(lhs - np.abs(gsl))) - self.tol_step
            )
            rep.worst_ldsl2 = max(
                rep.worst_ldsl2, self._floor * sl_sq - abs_gsl - self.tol_step
            )
            rep.worst_gcp_decrease = max(
                rep.worst_gcp_decrease,
                m_quad + (self._floor / (2.0 * rep.kappa_B)) * abs_gsl - self.tol_step,
            )

            if self.check_descent:
                if self.problem.known_lipschitz is None:
                    raise ValueError("descent auditing needs a certified Lipschitz bound")
                f_k = self._f(it.x) if self._f_cache is None else self._f_cache
                f_next = self._f(it.x_next)
                self._f_cache = f_next
                lips = self.problem.known_lipschitz
                kb = rep.kappa_B
                w = it.w
                decrease = (self.config.tau * self._floor / (2.0 * kb)) * float(
                    np.sum(np.minimum(chi_v * chi_v / w, chi_v))
                )
                curvature_term = 0.5 * (kb + lips) * float(np.sum(chi_v * chi_v / (w * w)))
                bound = f_k - decrease + curvature_term
                slack = self.tol_descent_rel * (1.0 + abs(f_k))
                rep.worst_descent = max(rep.worst_descent, f_next - bound - slack)
