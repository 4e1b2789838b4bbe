"""Kernel back-end selection.

The compiled ``_kernels`` extension is used when it imports; otherwise, or
when ``M3DFPGA_PURE_PYTHON=1`` is set, the pure-Python reference runs.
Both produce identical results.
"""
from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("M3DFPGA_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        _impl = _compiled
        BACKEND = "cython"


def use_backend(name: str):
    """Switch back end at run time ("python" or "cython"); used by benchmarks and tests."""
    global _impl, BACKEND
    if name == "python":
        _impl, BACKEND = _kernels_py, "python"
    elif name == "cython":
        from . import _kernels as compiled  # type: ignore[attr-defined]
        _impl, BACKEND = compiled, "cython"
    else:
        raise ValueError(f"unknown backend {name!r}")


def ints(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.int64)


def floats(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def anneal(*args):
    return _impl.anneal(*args)


def route_search(ptr, dst, base, occ, cap, hist, pres_fac, dterm, xlo, xhi, ylo, yhi,
                 bx0, bx1, by0, by1, tree, target):
    return _impl.route_search(ptr, dst, base, occ, cap, hist, float(pres_fac), dterm,
                              xlo, xhi, ylo, yhi, int(bx0), int(bx1), int(by0), int(by1),
                              ints(tree), int(target))


def net_hpwl(*args):
    return _impl.net_hpwl(*args)
