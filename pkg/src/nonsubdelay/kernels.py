"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback is. Setting ``NONSUBDELAY_PURE_PYTHON=1`` forces the fallback.
"""

import os

if os.environ.get("NONSUBDELAY_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernels as _impl
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        from . import _pykernels as _impl

BACKEND = _impl.BACKEND
chain_decompose = _impl.chain_decompose
mixture_probs = _impl.mixture_probs
draw_index = _impl.draw_index
one_point_estimate = _impl.one_point_estimate
chain_gradient = _impl.chain_gradient
project_step = _impl.project_step
subset_gain_table = _impl.subset_gain_table


def available_backends():
    """Return the kernel modules importable in this environment."""
    from . import _pykernels

    mods = {"python": _pykernels}
    try:
        from . import _kernels

        mods["cython"] = _kernels
    except ImportError:
        pass
    return mods
