"""Kernel backend selection.

Imports the compiled Cython kernels when available, otherwise the pure-NumPy
fallback. The environment variable ``ASTR1B_KERNELS`` forces a backend:
``compiled`` (raise if the extension is missing) or ``python``.
"""

import os

_requested = os.environ.get("ASTR1B_KERNELS", "").strip().lower()

if _requested == "python":
    from . import _kernels_py as _impl
elif _requested == "compiled":
    from . import _kernels as _impl  # type: ignore[no-redef]
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as _impl  # type: ignore[no-redef]

BACKEND = _impl.BACKEND_NAME

feasible_decrease = _impl.feasible_decrease
chi_measure = _impl.chi_measure
linear_step = _impl.linear_step
linear_step_scalar = _impl.linear_step_scalar
adagrad_weights = _impl.adagrad_weights
maxchi_weights = _impl.maxchi_weights
radii = _impl.radii
