# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython implementations of the per-iteration vector kernels.

Semantics mirror `astr1b._kernels_py` element by element (same IEEE
operations in the same order), so the two backends are bitwise
interchangeable. Keep the two files in sync.
"""

from libc.math cimport fabs, sqrt

BACKEND_NAME = "compiled"


cdef inline double _dmin(double a, double b) nogil:
    return a if a < b else b


cdef inline double _dmax(double a, double b) nogil:
    return a if a > b else b


def feasible_decrease(const double[::1] x, const double[::1] g, const double[::1] lower,
                      const double[::1] upper, double alpha, double[::1] out):
    """delta_i: largest step in [0, alpha] along -sign(g_i) e_i staying in the box."""
    cdef Py_ssize_t i, n = x.shape[0]
    for i in range(n):
        if g[i] > 0.0:
            out[i] = _dmin(alpha, x[i] - lower[i])
        elif g[i] < 0.0:
            out[i] = _dmin(alpha, upper[i] - x[i])
        else:
            out[i] = 0.0
    return out


def chi_measure(const double[::1] x, const double[::1] g, const double[::1] lower,
                const double[::1] upper, double alpha, double[::1] out):
    """chi_i = delta_i(alpha) * |g_i| (componentwise feasible decrease of the linear model)."""
    cdef Py_ssize_t i, n = x.shape[0]
    for i in range(n):
        if g[i] > 0.0:
            out[i] = _dmin(alpha, x[i] - lower[i]) * fabs(g[i])
        elif g[i] < 0.0:
            out[i] = _dmin(alpha, upper[i] - x[i]) * fabs(g[i])
        else:
            out[i] = 0.0
    return out


def linear_step(const double[::1] x, const double[::1] g, const double[::1] lower,
                const double[::1] upper, const double[::1] radii, double[::1] out):
    """s_i = -delta_i(radii_i) * sign(g_i) for a per-coordinate radius vector."""
    cdef Py_ssize_t i, n = x.shape[0]
    for i in range(n):
        if g[i] > 0.0:
            out[i] = -_dmin(radii[i], x[i] - lower[i])
        elif g[i] < 0.0:
            out[i] = _dmin(radii[i], upper[i] - x[i])
        else:
            out[i] = 0.0
    return out


def linear_step_scalar(const double[::1] x, const double[::1] g, const double[::1] lower,
                       const double[::1] upper, double radius, double[::1] out):
    """linear_step with one scalar radius replicated across coordinates."""
    cdef Py_ssize_t i, n = x.shape[0]
    for i in range(n):
        if g[i] > 0.0:
            out[i] = -_dmin(radius, x[i] - lower[i])
        elif g[i] < 0.0:
            out[i] = _dmin(radius, upper[i] - x[i])
        else:
            out[i] = 0.0
    return out


def adagrad_weights(double[::1] accum, const double[::1] chi, double sigma,
                    double[::1] out):
    """accum_i += chi_i**2 (in place); out_i = sqrt(sigma + accum_i)."""
    cdef Py_ssize_t i, n = accum.shape[0]
    for i in range(n):
        accum[i] = accum[i] + chi[i] * chi[i]
        out[i] = sqrt(sigma + accum[i])
    return out


def maxchi_weights(double[::1] vmax, const double[::1] chi, double sigma,
                   double scale, double[::1] out):
    """vmax_i = max(vmax_i, chi_i) (in place); out_i = max(sigma, vmax_i) * scale."""
    cdef Py_ssize_t i, n = vmax.shape[0]
    for i in range(n):
        vmax[i] = _dmax(vmax[i], chi[i])
        out[i] = _dmax(sigma, vmax[i]) * scale
    return out


def radii(const double[::1] chi, const double[::1] w, double[::1] out):
    """Trust-region radii: out_i = chi_i / w_i."""
    cdef Py_ssize_t i, n = chi.shape[0]
    for i in range(n):
        out[i] = chi[i] / w[i]
    return out
