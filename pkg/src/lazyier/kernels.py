"""Kernel selection.

The compiled kernel is used when it imports; set ``LAZYIER_PURE_PYTHON=1``
to force the numpy fallback.
"""
import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("LAZYIER_PURE_PYTHON") == "1":
        raise ImportError("pure-Python kernels requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKEND = "cython" if _ckernels is not None else "numpy"


def edge_chain(seed, rows, cols, p_pre, p_post, alpha, T, tau, backend=None):
    """Simulate independent two-state edge chains.

    Returns a ``(T, m)`` uint8 array of edge states. Layers ``t <= tau``
    (1-based) refresh from ``p_pre``, later layers from ``p_post``.
    """
    backend = backend or BACKEND
    args = (
        int(seed) & 0xFFFFFFFFFFFFFFFF,
        np.ascontiguousarray(rows, dtype=np.int64),
        np.ascontiguousarray(cols, dtype=np.int64),
        np.ascontiguousarray(p_pre, dtype=np.float64),
        np.ascontiguousarray(p_post, dtype=np.float64),
        float(alpha),
        int(T),
        int(tau),
    )
    if backend == "cython":
        if _ckernels is None:
            raise RuntimeError("compiled kernels are not available")
        return _ckernels.edge_chain(*args)
    if backend == "numpy":
        return _pykernels.edge_chain(*args)
    raise ValueError(f"unknown backend {backend!r}")
