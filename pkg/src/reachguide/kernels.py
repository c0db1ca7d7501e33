"""Hot numeric kernels: per-pixel ray/AABB depth rendering.

Two interchangeable backends produce bit-identical float64 output:

* a numba ``@njit`` scalar-loop kernel (default when numba imports), and
* a pure-numpy vectorized fallback.

Set ``REACHGUIDE_PURE_NUMPY=1`` to force the numpy path (also used
automatically when numba is unavailable).  ``bench/render_bench.py``
compares the two.
"""

import os

import numpy as np

USE_NUMBA = os.environ.get("REACHGUIDE_PURE_NUMPY", "0") != "1"
if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False


def _render_depth_loops(origin, dirs, box_lo, box_hi, max_range):
    # Slab-method ray/AABB intersection.  Depth is the ray parameter t of
    # the nearest entry point; ray directions have unit camera-frame z, so
    # t equals the camera-frame depth directly.
    height, width = dirs.shape[0], dirs.shape[1]
    nboxes = box_lo.shape[0]
    depth = np.full((height, width), max_range)
    valid = np.zeros((height, width), dtype=np.bool_)
    for i in range(height):
        for j in range(width):
            best = np.inf
            for b in range(nboxes):
                t_near = -np.inf
                t_far = np.inf
                ok = True
                for a in range(3):
                    d = dirs[i, j, a]
                    if d == 0.0:
                        if origin[a] < box_lo[b, a] or origin[a] > box_hi[b, a]:
                            ok = False
                    else:
                        inv = 1.0 / d
                        t1 = (box_lo[b, a] - origin[a]) * inv
                        t2 = (box_hi[b, a] - origin[a]) * inv
                        lo_t = min(t1, t2)
                        hi_t = max(t1, t2)
                        t_near = max(t_near, lo_t)
                        t_far = min(t_far, hi_t)
                if ok and t_far >= t_near and t_near > 0.0 and t_near < best:
                    best = t_near
            if best < np.inf and best <= max_range:
                depth[i, j] = best
                valid[i, j] = True
    return depth, valid


def _render_depth_numpy(origin, dirs, box_lo, box_hi, max_range):
    """Vectorized over pixels; loops only over boxes and axes."""
    height, width = dirs.shape[0], dirs.shape[1]
    best = np.full((height, width), np.inf)
    for b in range(box_lo.shape[0]):
        t_near = np.full((height, width), -np.inf)
        t_far = np.full((height, width), np.inf)
        ok = np.ones((height, width), dtype=bool)
        for a in range(3):
            d = dirs[:, :, a]
            zero = d == 0.0
            with np.errstate(divide="ignore", invalid="ignore"):
                inv = 1.0 / d
                t1 = (box_lo[b, a] - origin[a]) * inv
                t2 = (box_hi[b, a] - origin[a]) * inv
            lo_t = np.minimum(t1, t2)
            hi_t = np.maximum(t1, t2)
            if origin[a] < box_lo[b, a] or origin[a] > box_hi[b, a]:
                ok &= ~zero
            t_near = np.where(zero, t_near, np.maximum(t_near, lo_t))
            t_far = np.where(zero, t_far, np.minimum(t_far, hi_t))
        hit = ok & (t_far >= t_near) & (t_near > 0.0) & (t_near < best)
        best = np.where(hit, t_near, best)
    valid = np.isfinite(best) & (best <= max_range)
    depth = np.where(valid, best, max_range)
    return depth, valid


if USE_NUMBA:
    _render_depth_jit = njit(cache=True)(_render_depth_loops)


def render_depth_kernel(origin, dirs, box_lo, box_hi, max_range):
    """Depth-render a pixel grid of rays against a set of AABBs.

    origin: (3,) world ray origin.  dirs: (H, W, 3) world ray directions
    with unit camera-z.  box_lo/box_hi: (N, 3) AABB corners.  Returns
    (depth, valid): misses carry depth == max_range and valid == False.
    """
    origin = np.ascontiguousarray(origin, dtype=np.float64)
    dirs = np.ascontiguousarray(dirs, dtype=np.float64)
    box_lo = np.ascontiguousarray(box_lo, dtype=np.float64).reshape(-1, 3)
    box_hi = np.ascontiguousarray(box_hi, dtype=np.float64).reshape(-1, 3)
    if USE_NUMBA:
        return _render_depth_jit(origin, dirs, box_lo, box_hi, float(max_range))
    return _render_depth_numpy(origin, dirs, box_lo, box_hi, float(max_range))


def ray_boxes_depth(origin, direction, box_lo, box_hi):
    """Nearest positive-entry t of one ray against many AABBs (inf if none).

    Same slab arithmetic as the frame kernel; used for single-ray
    occlusion queries.
    """
    depth, valid = render_depth_kernel(
        origin, np.asarray(direction, dtype=np.float64).reshape(1, 1, 3),
        box_lo, box_hi, np.inf)
    return depth[0, 0] if valid[0, 0] else np.inf
