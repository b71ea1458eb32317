"""Numpy implementations of the hot kernels (fallback for the compiled core)."""

import numpy as np


def nondominated_ranks(objs):
    """Front index (0-based) of every row of ``objs`` under minimization."""
    objs = np.asarray(objs, dtype=float)
    n = objs.shape[0]
    ranks = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return ranks
    le = np.all(objs[:, None, :] <= objs[None, :, :], axis=2)
    lt = np.any(objs[:, None, :] < objs[None, :, :], axis=2)
    dom = le & lt  # dom[i, j]: i dominates j
    count = dom.sum(axis=0)
    remaining = np.ones(n, dtype=bool)
    front = 0
    while remaining.any():
        current = remaining & (count == 0)
        ranks[current] = front
        remaining &= ~current
        count = count - dom[current].sum(axis=0)
        front += 1
    return ranks


def hv2d(points, ref):
    """Exact area dominated by ``points`` (n, 2) and bounded by ``ref``."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    r0, r1 = float(ref[0]), float(ref[1])
    pts = pts[(pts[:, 0] < r0) & (pts[:, 1] < r1)]
    if pts.shape[0] == 0:
        return 0.0
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    area = 0.0
    prev = r1
    for f0, f1 in pts:
        if f1 < prev:
            area += (r0 - f0) * (prev - f1)
            prev = f1
    return float(area)


def min_distances(reference, achieved, plus=False):
    """For each reference point, the distance to its nearest achieved point.

    With ``plus`` the per-component difference is clamped at zero first
    (achieved minus reference, minimization).
    """
    ref = np.asarray(reference, dtype=float)
    ach = np.asarray(achieved, dtype=float)
    diff = ach[None, :, :] - ref[:, None, :]
    if plus:
        diff = np.maximum(diff, 0.0)
    return np.sqrt((diff * diff).sum(axis=2)).min(axis=1)
