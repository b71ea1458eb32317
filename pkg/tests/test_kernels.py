import numpy as np
import pytest

from mtobench import _kernels
from mtobench._kernels import _pykernels

pytestmark = pytest.mark.filterwarnings("ignore::RuntimeWarning")


def brute_ranks(objs):
    n = len(objs)
    ranks = np.full(n, -1)
    remaining = set(range(n))
    level = 0
    while remaining:
        front = [i for i in remaining
                 if not any(np.all(objs[j] <= objs[i]) and np.any(objs[j] < objs[i]) for j in remaining)]
        for i in front:
            ranks[i] = level
        remaining -= set(front)
        level += 1
    return ranks


def brute_hv2d(points, ref):
    # grid over all distinct coordinates: exact for axis-aligned unions
    pts = [p for p in points if p[0] < ref[0] and p[1] < ref[1]]
    if not pts:
        return 0.0
    xs = sorted({p[0] for p in pts} | {ref[0]})
    ys = sorted({p[1] for p in pts} | {ref[1]})
    area = 0.0
    for i in range(len(xs) - 1):
        for j in range(len(ys) - 1):
            cx, cy = xs[i], ys[j]
            if any(p[0] <= cx and p[1] <= cy for p in pts):
                area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j])
    return area


def test_backend_selected():
    assert _kernels.BACKEND in ("cython", "python")


def test_nondominated_ranks_matches_brute_force(backend):
    rng = np.random.default_rng(0)
    for _ in range(200):
        n, m = int(rng.integers(1, 21)), int(rng.integers(1, 4))
        objs = rng.integers(0, 5, size=(n, m)).astype(float)
        np.testing.assert_array_equal(_kernels.nondominated_ranks(objs), brute_ranks(objs))


def test_hv2d_matches_grid_sum(backend):
    rng = np.random.default_rng(1)
    for _ in range(200):
        pts = rng.random((int(rng.integers(1, 8)), 2))
        ref = np.array([1.1, 1.1])
        assert _kernels.hv2d(pts, ref) == pytest.approx(brute_hv2d(pts, ref), abs=1e-12)


def test_min_distances_matches_double_loop(backend):
    rng = np.random.default_rng(2)
    ref = rng.random((30, 3))
    ach = rng.random((12, 3))
    plain = [min(np.linalg.norm(a - z) for a in ach) for z in ref]
    plus = [min(np.linalg.norm(np.maximum(a - z, 0)) for a in ach) for z in ref]
    np.testing.assert_allclose(_kernels.min_distances(ref, ach, False), plain, atol=1e-12)
    np.testing.assert_allclose(_kernels.min_distances(ref, ach, True), plus, atol=1e-12)


@pytest.mark.skipif(_kernels.BACKEND != "cython", reason="compiled extension not built")
def test_backends_agree():
    from mtobench._kernels import _ckernels

    rng = np.random.default_rng(3)
    for _ in range(50):
        objs = rng.random((40, 3))
        np.testing.assert_array_equal(_ckernels.nondominated_ranks(objs), _pykernels.nondominated_ranks(objs))
        pts = rng.random((25, 2))
        assert _ckernels.hv2d(pts, np.ones(2)) == pytest.approx(_pykernels.hv2d(pts, np.ones(2)), abs=1e-12)
        z, a = rng.random((20, 2)), rng.random((7, 2))
        np.testing.assert_allclose(_ckernels.min_distances(z, a, True), _pykernels.min_distances(z, a, True))


def test_fallback_selected_by_environment():
    import os
    import subprocess
    import sys

    code = "import mtobench._kernels as k; print(k.BACKEND, k.hv2d.__module__)"
    env = dict(os.environ, MTOBENCH_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["python", "mtobench._kernels._pykernels"]
