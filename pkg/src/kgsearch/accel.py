"""Kernel dispatch: numba-compiled fast path with a pure-Python fallback.

Set ``KGSEARCH_NUMBA=0`` to force the fallback everywhere. Tiny graphs are
always routed to the fallback because JIT compilation costs more than it
saves there; both variants share one source (``kernels``) and produce
bit-identical outputs, which the test suite asserts.
"""

import os

from . import kernels as _py

NUMBA_ENV = os.environ.get("KGSEARCH_NUMBA", "1").strip().lower()
NUMBA_REQUESTED = NUMBA_ENV not in ("0", "false", "no", "off")

# Below this many CSR entries the interpreter beats JIT warm-up.
MIN_JIT_SIZE = 4096

NUMBA_AVAILABLE = False
_jit = None

if NUMBA_REQUESTED:
    try:
        import numba

        class _Jitted:
            def __init__(self):
                dec = numba.njit(cache=True)
                self.sketch_round = dec(_py.sketch_round)
                self.pll_build = dec(_py.pll_build)
                self.bfs_distances = dec(_py.bfs_distances)

        _jit = _Jitted()
        NUMBA_AVAILABLE = True
    except ImportError:
        _jit = None


def kernels_for(size):
    """Pick the kernel module for a workload of ``size`` CSR entries."""
    if NUMBA_AVAILABLE and size >= MIN_JIT_SIZE:
        return _jit
    return _py


def python_kernels():
    return _py


def numba_kernels():
    """The compiled kernel set, or None when numba is unavailable/disabled."""
    return _jit if NUMBA_AVAILABLE else None


def warmup():
    """Force JIT compilation of all kernels on a toy input."""
    if not NUMBA_AVAILABLE:
        return False
    import numpy as np

    indptr = np.array([0, 1, 2], dtype=np.int64)
    nbrs = np.array([1, 0], dtype=np.int64)
    order = np.array([0, 1], dtype=np.int64)
    _jit.bfs_distances(indptr, nbrs, 0, -1)
    _jit.pll_build(indptr, nbrs, order, 2)
    visited = np.zeros(2, dtype=np.bool_)
    used = np.zeros(2, dtype=np.bool_)
    out = np.full(2, -1, dtype=np.int64)
    _jit.sketch_round(indptr, nbrs, order, visited, used, 2, out.copy(), out.copy(), out.copy())
    return True
