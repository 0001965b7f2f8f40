"""Trial-step construction: radii, generalized Cauchy point, refinement.

Per iteration the trust region is the box {|s_i| <= Delta_i} with
Delta_i = chi_i / w_i, intersected with the feasible set. The linear step
s^L minimizes g's in that intersection (a separable problem solved in
closed form), the quadratic step s^Q = gamma s^L caps the curvature along
s^L, and `refine` optionally improves s^Q by a projected truncated
conjugate-gradient sweep that never increases the model, so the final step
retains the full Cauchy decrease.

The Hessian approximation enters only through matrix-vector products: every
function takes ``b_op``, a callable v -> Bv, or None for B = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import kernels
from .criticality import ChiVector
from .oracle import Bounds

__all__ = ["StepBundle", "radii", "gcp_linear", "gcp_quadratic", "refine", "model_value"]

BOperator = Optional[Callable[[np.ndarray], np.ndarray]]


@dataclass
class StepBundle:
    """All step-related quantities of one iteration."""

    radii: np.ndarray
    s_linear: np.ndarray
    gamma: float
    s_quadratic: np.ndarray
    s_final: np.ndarray
    model_decrease: float  # -(g's + 0.5 s'Bs) at s_final, nonnegative


def radii(chi_vec: ChiVector, w: np.ndarray) -> np.ndarray:
    """Componentwise trust-region radii Delta_i = chi_i / w_i."""
    values = chi_vec.values
    if w.shape != values.shape:
        raise ValueError("weight vector length mismatch")
    if np.any(w <= 0.0):
        raise ValueError("weights must be strictly positive")
    out = np.empty_like(values)
    kernels.radii(values, w, out)
    return out


def gcp_linear(x: np.ndarray, g: np.ndarray, bounds: Bounds, radii_vec) -> np.ndarray:
    """Minimizer s^L of g's over {x + s feasible, |s_i| <= radii_i} (separable).

    `radii_vec` may be a scalar or a per-coordinate vector.
    """
    x = np.ascontiguousarray(x, dtype=float)
    g = np.ascontiguousarray(g, dtype=float)
    out = np.empty_like(x)
    if np.isscalar(radii_vec) or np.ndim(radii_vec) == 0:
        kernels.linear_step_scalar(x, g, bounds.lower, bounds.upper, float(radii_vec), out)
    else:
        r = np.ascontiguousarray(radii_vec, dtype=float)
        kernels.linear_step(x, g, bounds.lower, bounds.upper, r, out)
    return out


def gcp_quadratic(
    s_linear: np.ndarray, g: np.ndarray, b_op: BOperator
) -> tuple[float, np.ndarray]:
    """Generalized Cauchy point: s^Q = gamma s^L with the curvature-capped gamma.

    gamma = min(1, |g's^L| / (s^L)'B s^L) when the curvature along s^L is
    positive, otherwise 1.
    """
    if b_op is None:
        return 1.0, s_linear.copy()
    bs = b_op(s_linear)
    curv = float(s_linear @ bs)
    if curv > 0.0:
        gamma = min(1.0, abs(float(g @ s_linear)) / curv)
    else:
        gamma = 1.0
    return gamma, gamma * s_linear


def model_value(g: np.ndarray, b_op: BOperator, s: np.ndarray) -> float:
    """Quadratic model g's + 0.5 s'Bs."""
    if b_op is None:
        return float(g @ s)
    return float(g @ s) + 0.5 * float(s @ b_op(s))


def _max_step_to_box(s, d, lo, hi) -> float:
    """Largest t >= 0 with lo <= s + t d <= hi (box assumed bounded where d != 0)."""
    t = np.inf
    pos = d > 0.0
    neg = d < 0.0
    if np.any(pos):
        t = min(t, float(np.min((hi[pos] - s[pos]) / d[pos])))
    if np.any(neg):
        t = min(t, float(np.min((lo[neg] - s[neg]) / d[neg])))
    return max(t, 0.0)


def refine(
    x: np.ndarray,
    g: np.ndarray,
    b_op: BOperator,
    bounds: Bounds,
    radii_vec: np.ndarray,
    s_quadratic: np.ndarray,
    tau: float = 1.0,
    max_inner: int = 0,
    rtol: float = 1e-4,
) -> np.ndarray:
    """Projected truncated CG on the model, started at s^Q.

    Iterates are projected onto {max(lower-x, -Delta) <= s <= min(upper-x,
    Delta)}; the sweep stops on negative curvature, on a relative residual
    below `rtol`, or after `max_inner` steps. The result is kept only if it
    does not increase the model, so the Cauchy decrease condition holds for
    any tau <= 1 by construction. With B = 0 or max_inner = 0, s^Q is
    returned unchanged.
    """
    if b_op is None or max_inner <= 0:
        return s_quadratic
    lo = np.maximum(bounds.lower - x, -radii_vec)
    hi = np.minimum(bounds.upper - x, radii_vec)

    m_q = model_value(g, b_op, s_quadratic)
    s = np.clip(s_quadratic, lo, hi)
    bs = b_op(s)
    r = g + bs
    m_cur = float(g @ s) + 0.5 * float(s @ bs)
    s_best, m_best = s, m_cur

    rr0 = float(r @ r)
    rr = rr0
    if rr0 == 0.0:
        return s_quadratic
    d = -r
    for _ in range(max_inner):
        bd = b_op(d)
        curv = float(d @ bd)
        if curv <= 0.0:
            # negative curvature: march to the box boundary along d
            t = _max_step_to_box(s, d, lo, hi)
            if 0.0 < t < np.inf:
                cand = np.clip(s + t * d, lo, hi)
                m_cand = model_value(g, b_op, cand)
                if m_cand < m_best:
                    s_best, m_best = cand, m_cand
            break
        alpha = rr / curv
        s_new = s + alpha * d
        clipped = np.clip(s_new, lo, hi)
        if np.array_equal(clipped, s_new):
            m_cur = m_cur + alpha * float(r @ d) + 0.5 * alpha * alpha * curv
            s = s_new
            r = r + alpha * bd
            rr_new = float(r @ r)
            if m_cur < m_best:
                s_best, m_best = s, m_cur
            if rr_new <= rtol * rtol * rr0:
                break
            d = -r + (rr_new / rr) * d
            rr = rr_new
        else:
            # an iterate left the box: project and restart CG from there;
            # stop when projections stall against the box faces
            s = clipped
            bs = b_op(s)
            r = g + bs
            m_cur = float(g @ s) + 0.5 * float(s @ bs)
            rr = float(r @ r)
            progress = m_best - m_cur
            if m_cur < m_best:
                s_best, m_best = s, m_cur
            if rr <= rtol * rtol * rr0:
                break
            if progress <= 1e-10 * (1.0 + abs(m_best)):
                break
            d = -r

    if m_best <= m_q:
        return s_best
    return s_quadratic
