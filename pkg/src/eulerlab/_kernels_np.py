"""Pure numpy implementation of the hot pairwise kernels.

Selected at import time by ``eulerlab.kernels`` when the compiled Cython
extension is unavailable.  Semantics must match ``_kernels.pyx`` exactly;
the test suite cross-checks both backends.
"""

import numpy as np

TWO_PI = 2.0 * np.pi
_CHUNK = 1 << 21  # target elements per broadcast block


def free_velocity(src, gam, tgt, self_eps=1e-14):
    """Velocity induced at tgt by free-space point vortices at src.

    u(x) = sum_j gam_j/(2 pi) * (x - s_j)^perp / |x - s_j|^2, with
    v^perp = (-v_y, v_x).  Pairs closer than self_eps are skipped (the
    principal value of the self-interaction vanishes by symmetry).
    """
    src = np.ascontiguousarray(src, dtype=float)
    tgt = np.ascontiguousarray(tgt, dtype=float)
    gam = np.ascontiguousarray(gam, dtype=float)
    out = np.zeros_like(tgt)
    rows = max(1, _CHUNK // max(1, len(src)))
    for k in range(0, len(tgt), rows):
        t = tgt[k:k + rows]
        dx = t[:, None, 0] - src[None, :, 0]
        dy = t[:, None, 1] - src[None, :, 1]
        r2 = dx * dx + dy * dy
        mask = r2 > self_eps * self_eps
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.where(mask, gam[None, :] / (TWO_PI * r2), 0.0)
        out[k:k + rows, 0] = -(f * dy).sum(axis=1)
        out[k:k + rows, 1] = (f * dx).sum(axis=1)
    return out


def disk_velocity(src, gam, tgt, R=1.0, self_eps=1e-14):
    """Velocity at tgt induced by point vortices inside the disk of radius R.

    Image kernel of the disk's hydrodynamic Green function: each source s
    has an opposite-strength image at R^2 s / |s|^2.  The free part skips
    near-coincident pairs; the (smooth) image part is always included.
    """
    src = np.ascontiguousarray(src, dtype=float)
    tgt = np.ascontiguousarray(tgt, dtype=float)
    gam = np.ascontiguousarray(gam, dtype=float)
    out = free_velocity(src, gam, tgt, self_eps)
    s2 = src[:, 0] ** 2 + src[:, 1] ** 2
    ok = s2 > 1e-30
    if not np.any(ok):
        return out
    img = np.empty_like(src[ok])
    img[:, 0] = R * R * src[ok, 0] / s2[ok]
    img[:, 1] = R * R * src[ok, 1] / s2[ok]
    out -= free_velocity(img, gam[ok], tgt, 0.0)
    return out


def min_pair_distance(pts):
    """Minimum pairwise distance among the rows of pts (n >= 2)."""
    pts = np.asarray(pts, dtype=float)
    n = len(pts)
    best = np.inf
    for i in range(n - 1):
        d = np.min(np.sum((pts[i + 1:] - pts[i]) ** 2, axis=1))
        best = min(best, d)
    return float(np.sqrt(best))
