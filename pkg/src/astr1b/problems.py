"""Built-in registry of analytic bound-constrained test problems.

Self-contained analogues of the classic bound-constrained families:
nonconvex diagonal quadratics, membrane obstacle discretizations,
exponential-linear sums, bounded generalized Rosenbrock, a strictly convex
quadratic, and a one-dimensional diagnostic problem. Every problem carries
an analytic gradient, a certified gradient-Lipschitz bound on its box, a
certified lower bound on f, and a feasible start point.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .oracle import Bounds, Problem

__all__ = [
    "UnknownProblemError",
    "UnsupportedDimensionError",
    "registry_get",
    "registry_names",
    "desk_suite",
    "DESK_SUITE",
]


class UnknownProblemError(KeyError):
    """Raised for a problem name not present in the registry."""


class UnsupportedDimensionError(ValueError):
    """Raised when a registry problem does not admit the requested dimension."""


def _quad1d(n: int) -> Problem:
    if n != 1:
        raise UnsupportedDimensionError("quad1d is one-dimensional")

    def oracle(x):
        return 0.5 * x[0] ** 2, x.copy()

    return Problem(
        name="quad1d",
        dim=1,
        bounds=Bounds(np.array([-1.0]), np.array([2.0])),
        oracle=oracle,
        x0=np.array([1.0]),
        known_lipschitz=1.0,
        known_flow=0.0,
    )


def _boxquad_convex(n: int) -> Problem:
    """Strictly convex diagonal quadratic 0.5 x'Dx - 1'x on [0,1]^n, D = diag(1..n)."""
    if n < 1:
        raise UnsupportedDimensionError("boxquad-convex needs n >= 1")
    d = np.arange(1.0, n + 1.0)

    def oracle(x):
        return 0.5 * float(d @ (x * x)) - float(np.sum(x)), d * x - 1.0

    # coordinate minimizers 1/d_i lie in (0, 1], each contributing -1/(2 d_i)
    flow = float(np.sum(-0.5 / d))
    return Problem(
        name="boxquad-convex",
        dim=n,
        bounds=Bounds(np.zeros(n), np.ones(n)),
        oracle=oracle,
        x0=np.full(n, 0.5),
        known_lipschitz=float(n),
        known_flow=flow,
    )


def _ncvx_quad(n: int) -> Problem:
    """Indefinite diagonal quadratic 0.5 x'Dx - 1'x on [0,2]^n.

    Every third diagonal entry is negative (d_i = -i for i divisible by 3,
    d_i = i otherwise), so the exact minimum is a separable enumeration over
    {lower, upper, interior stationary point}.
    """
    if n < 1:
        raise UnsupportedDimensionError("ncvx-quad needs n >= 1")
    idx = np.arange(1.0, n + 1.0)
    d = np.where(np.arange(1, n + 1) % 3 == 0, -idx, idx)

    def oracle(x):
        return 0.5 * float(d @ (x * x)) - float(np.sum(x)), d * x - 1.0

    flow = 0.0
    for di in d:
        if di > 0:
            xs = min(1.0 / di, 2.0)
            flow += 0.5 * di * xs * xs - xs
        else:
            flow += min(0.0, 2.0 * di - 2.0)
    return Problem(
        name="ncvx-quad",
        dim=n,
        bounds=Bounds(np.zeros(n), np.full(n, 2.0)),
        oracle=oracle,
        x0=np.full(n, 0.5),
        known_lipschitz=float(n),
        known_flow=flow,
    )


def _laplacian_apply(x: np.ndarray, m: int) -> np.ndarray:
    """5-point stencil product (diag 4, neighbors -1) on an m-by-m grid."""
    u = x.reshape(m, m)
    ax = 4.0 * u
    ax[1:, :] -= u[:-1, :]
    ax[:-1, :] -= u[1:, :]
    ax[:, 1:] -= u[:, :-1]
    ax[:, :-1] -= u[:, 1:]
    return ax.ravel()


def _obstacle(n: int, name: str, banded: bool) -> Problem:
    m = math.isqrt(n)
    if m * m != n or m < 2:
        raise UnsupportedDimensionError(f"{name} needs a perfect-square dimension >= 4")
    h = 1.0 / (m + 1)
    b = np.full(n, 4.0 * h * h)

    # grid coordinates in (0,1)
    p = (np.arange(m) + 1.0) * h
    pp, qq = np.meshgrid(p, p, indexing="ij")
    if banded:
        tent = np.minimum(np.minimum(pp, 1.0 - pp), np.minimum(qq, 1.0 - qq))
        lower = (0.8 * tent).ravel()
        upper = lower + 0.4
        x0 = 0.5 * (lower + upper)
    else:
        plateau = (np.abs(pp - 0.5) <= 0.25) & (np.abs(qq - 0.5) <= 0.25)
        lower = np.where(plateau, 0.3, 0.0).ravel()
        upper = np.full(n, np.inf)
        x0 = lower.copy()

    def oracle(x, m=m, b=b):
        ax = _laplacian_apply(x, m)
        return 0.5 * float(x @ ax) - float(b @ x), ax - b

    # unconstrained minimum of the convex quadratic is a valid lower bound;
    # solve A u = b once by conjugate gradients on the stencil
    u = np.zeros(n)
    r = b.copy()
    d = r.copy()
    rr = float(r @ r)
    for _ in range(20 * m):
        ad = _laplacian_apply(d, m)
        alpha = rr / float(d @ ad)
        u += alpha * d
        r -= alpha * ad
        rr_new = float(r @ r)
        if rr_new <= 1e-26 * float(b @ b):
            break
        d = r + (rr_new / rr) * d
        rr = rr_new
    flow = -0.5 * float(b @ u)
    return Problem(
        name=name,
        dim=n,
        bounds=Bounds(lower, upper),
        oracle=oracle,
        x0=x0,
        known_lipschitz=8.0,
        known_flow=flow,
    )


def _explin(n: int) -> Problem:
    """Separable exponential-linear sum exp(x_i/2) - a_i x_i on [0,14]^n.

    The start sits near the upper corner, far from the interior minimizers
    around 2, so solvers must cover a long distance inside the box.
    """
    if n < 1:
        raise UnsupportedDimensionError("explin needs n >= 1")
    a = 1.0 + np.arange(1.0, n + 1.0) / n
    c = 0.5

    def oracle(x):
        e = np.exp(c * x)
        return float(np.sum(e) - a @ x), c * e - a

    # interior stationary points x* = log(a/c)/c, value (a/c)(1 - log(a/c))
    r = a / c
    flow = float(np.sum(r * (1.0 - np.log(r))))
    return Problem(
        name="explin",
        dim=n,
        bounds=Bounds(np.zeros(n), np.full(n, 14.0)),
        oracle=oracle,
        x0=np.full(n, 12.0),
        known_lipschitz=c * c * math.exp(c * 14.0),
        known_flow=flow,
    )


def _rosenbrock_box(n: int) -> Problem:
    """Generalized Rosenbrock restricted to [-2,2]^n."""
    if n < 2:
        raise UnsupportedDimensionError("rosenbrock-box needs n >= 2")
    c = 100.0

    def oracle(x):
        r = x[1:] - x[:-1] ** 2
        e = 1.0 - x[:-1]
        f = float(c * (r @ r) + e @ e)
        g = np.zeros_like(x)
        g[:-1] = -4.0 * c * r * x[:-1] - 2.0 * e
        g[1:] += 2.0 * c * r
        return f, g

    # Gershgorin bound for the Hessian over [-2,2]^n
    lips = 74.0 * c + 2.0
    x0 = np.full(n, 1.0)
    x0[::2] = -1.2
    return Problem(
        name="rosenbrock-box",
        dim=n,
        bounds=Bounds(np.full(n, -2.0), np.full(n, 2.0)),
        oracle=oracle,
        x0=x0,
        known_lipschitz=lips,
        known_flow=0.0,
    )


def _qing_box(n: int) -> Problem:
    """Separable quartic sum (x_i^2 - i)^2 on [0, sqrt(n)+1]^n."""
    if n < 1:
        raise UnsupportedDimensionError("qing-box needs n >= 1")
    idx = np.arange(1.0, n + 1.0)
    u = math.sqrt(n) + 1.0

    def oracle(x):
        r = x * x - idx
        return float(r @ r), 4.0 * x * r

    return Problem(
        name="qing-box",
        dim=n,
        bounds=Bounds(np.zeros(n), np.full(n, u)),
        oracle=oracle,
        x0=np.full(n, 0.5),
        known_lipschitz=12.0 * u * u - 4.0,
        known_flow=0.0,
    )


_REGISTRY: dict[str, Callable[[int], Problem]] = {
    "quad1d": _quad1d,
    "boxquad-convex": _boxquad_convex,
    "ncvx-quad": _ncvx_quad,
    "obstacle-low": lambda n: _obstacle(n, "obstacle-low", banded=False),
    "obstacle-band": lambda n: _obstacle(n, "obstacle-band", banded=True),
    "explin": _explin,
    "rosenbrock-box": _rosenbrock_box,
    "qing-box": _qing_box,
}

# default desk-scale experiment suite: (name, dimension)
DESK_SUITE: list[tuple[str, int]] = [
    ("quad1d", 1),
    ("boxquad-convex", 16),
    ("ncvx-quad", 10),
    ("explin", 12),
    ("qing-box", 8),
    ("rosenbrock-box", 4),
    ("obstacle-low", 25),
    ("obstacle-band", 25),
]


def registry_names() -> list[str]:
    return sorted(_REGISTRY)


def registry_get(name: str, n: int) -> Problem:
    """Instantiate a registered problem at dimension n."""
    try:
        builder = _REGISTRY[name]
    except KeyError:
        raise UnknownProblemError(name) from None
    if n < 1:
        raise UnsupportedDimensionError("dimension must be positive")
    return builder(n)


def desk_suite() -> list[Problem]:
    """Instantiate the default suite."""
    return [registry_get(name, n) for name, n in DESK_SUITE]
