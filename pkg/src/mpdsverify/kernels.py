"""Kernel selection: the compiled extension when importable, otherwise pure Python.

Set ``MPDS_VERIFY_PURE=1`` to force the fallback.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("MPDS_VERIFY_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

ex_image = _impl.ex_image
eu_fix = _impl.eu_fix
eg_fix = _impl.eg_fix
attractor = _impl.attractor


class Csr:
    """Forward and reverse adjacency of a finite graph in CSR form."""

    def __init__(self, n: int, adjacency):
        self.n = n
        src, dst = [], []
        for u, outs in enumerate(adjacency):
            for v in outs:
                src.append(u)
                dst.append(v)
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        self.succ_ptr, self.succ_idx = _csr(n, src, dst)
        self.pred_ptr, self.pred_idx = _csr(n, dst, src)
        self.outdeg = np.diff(self.succ_ptr)


def _csr(n, src, dst):
    order = np.argsort(src, kind="stable")
    idx = dst[order].astype(np.int64)
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=ptr[1:])
    return ptr, np.ascontiguousarray(idx)
