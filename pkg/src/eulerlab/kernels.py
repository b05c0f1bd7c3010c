"""Hot-kernel backend selection.

Imports the compiled Cython kernels when available and falls back to the
numpy implementation otherwise.  ``BACKEND`` records which one is active.
"""

import numpy as np

try:
    from . import _kernels as _impl
    BACKEND = "cython"
except ImportError:  # extension not built on this install
    from . import _kernels_np as _impl
    BACKEND = "numpy"


def _prep(a):
    return np.ascontiguousarray(np.atleast_2d(np.asarray(a, dtype=float)))


def free_velocity(src, gam, tgt, self_eps=1e-14):
    return _impl.free_velocity(_prep(src), np.ascontiguousarray(gam, dtype=float),
                               _prep(tgt), self_eps)


def disk_velocity(src, gam, tgt, R=1.0, self_eps=1e-14):
    return _impl.disk_velocity(_prep(src), np.ascontiguousarray(gam, dtype=float),
                               _prep(tgt), R, self_eps)


def min_pair_distance(pts):
    pts = _prep(pts)
    if len(pts) < 2:
        return float("inf")
    return float(_impl.min_pair_distance(pts))
