"""Pure-NumPy implementations of the per-iteration vector kernels.

This is the fallback backend; `astr1b._kernels` (Cython) implements the same
functions with identical element-by-element floating-point semantics, so both
backends produce bitwise-equal results. Keep the two files in sync.

All arrays are 1-D float64 of equal length. `out` buffers must not alias the
inputs, except where a parameter is documented as updated in place.
"""

import numpy as np

BACKEND_NAME = "python"


def _decrease(x, g, lower, upper, alpha, out):
    down = np.minimum(alpha, x - lower)
    up = np.minimum(alpha, upper - x)
    out[...] = np.where(g > 0.0, down, np.where(g < 0.0, up, 0.0))
    return out


def feasible_decrease(x, g, lower, upper, alpha, out):
    """delta_i: largest step in [0, alpha] along -sign(g_i) e_i staying in the box."""
    return _decrease(x, g, lower, upper, alpha, out)


def chi_measure(x, g, lower, upper, alpha, out):
    """chi_i = delta_i(alpha) * |g_i| (componentwise feasible decrease of the linear model)."""
    _decrease(x, g, lower, upper, alpha, out)
    np.multiply(out, np.abs(g), out=out)
    return out


def linear_step(x, g, lower, upper, radii, out):
    """s_i = -delta_i(radii_i) * sign(g_i) for a per-coordinate radius vector."""
    _decrease(x, g, lower, upper, radii, out)
    out[...] = np.where(g > 0.0, -out, out)
    return out


def linear_step_scalar(x, g, lower, upper, radius, out):
    """linear_step with one scalar radius replicated across coordinates."""
    _decrease(x, g, lower, upper, radius, out)
    out[...] = np.where(g > 0.0, -out, out)
    return out


def adagrad_weights(accum, chi, sigma, out):
    """accum_i += chi_i**2 (in place); out_i = sqrt(sigma + accum_i)."""
    accum += chi * chi
    np.sqrt(sigma + accum, out=out)
    return out


def maxchi_weights(vmax, chi, sigma, scale, out):
    """vmax_i = max(vmax_i, chi_i) (in place); out_i = max(sigma, vmax_i) * scale."""
    np.maximum(vmax, chi, out=vmax)
    np.multiply(np.maximum(sigma, vmax), scale, out=out)
    return out


def radii(chi, w, out):
    """Trust-region radii: out_i = chi_i / w_i."""
    np.divide(chi, w, out=out)
    return out
