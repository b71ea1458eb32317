import itertools

import numpy as np
import pytest
from _fixtures import mo_result, problem_meta, random_archive

from mtobench.core import RunResult
from mtobench.datastore import ExperimentData
from mtobench.metrics import (
    METRICS,
    UnknownMetricError,
    compute_metric,
    hv,
    hv_monte_carlo,
    igd,
    igd_plus,
    nondominated_unique,
)


def _run(obj_series, cv_series=None, seed=0):
    G = len(obj_series[0])
    cvs = cv_series or [np.zeros(G) for _ in obj_series]
    return RunResult([np.asarray(o, float) for o in obj_series], [np.asarray(c, float) for c in cvs], None,
                     np.linspace(100, 1000, G).astype(np.int64), 0.5, seed, 0, False)


def _archive(cells, problems=None, run_times=None):
    """``cells[p][a][r]`` lists of per-task final objective values."""
    P, A, R = len(cells), len(cells[0]), len(cells[0][0])
    problems = problems or [problem_meta(f"P{p + 1}", T=len(cells[p][0][0])) for p in range(P)]
    results = [[[_run([[v, v] for v in cells[p][a][r]]) for r in range(R)] for a in range(A)] for p in range(P)]
    algs = [{"name": f"A{a + 1}", "algorithm": "GA", "params": {}} for a in range(A)]
    rt = np.ones((P, A, R)) if run_times is None else run_times
    return ExperimentData(algs, problems, results, rt, R, 2, False, 1, list(range(1, R + 1)))


# --- indicators --------------------------------------------------------------

def test_igd_examples():
    ref = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert igd(ref, ref) == 0.0 and igd_plus(ref, ref) == 0.0
    assert igd(np.array([[1.0, 1.0]]), ref) == pytest.approx(1.0)
    assert igd_plus(np.array([[1.0, 1.0]]), ref) == pytest.approx(1.0)
    assert np.isnan(igd(np.empty((0, 2)), ref))


def test_igd_plus_not_above_igd():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a, r = rng.random((8, 2)), rng.random((15, 2))
        assert igd_plus(a, r) <= igd(a, r) + 1e-12


def test_hv_examples():
    assert hv(np.array([[1.0, 1.0]]), np.array([2.0, 2.0])) == pytest.approx(1.0)
    assert hv(np.array([[1.0, 2.0], [2.0, 1.0]]), np.array([3.0, 3.0])) == pytest.approx(3.0)
    assert hv(np.array([[1.0, 2.0], [2.0, 1.0], [2.5, 2.5]]), np.array([3.0, 3.0])) == pytest.approx(3.0)
    assert hv(np.array([[4.0, 4.0]]), np.array([3.0, 3.0])) == 0.0
    assert hv(np.empty((0, 2)), np.array([1.0, 1.0])) == 0.0


def _grid_hv3(points, ref, n=60):
    # exact on the lattice of sorted point coordinates
    axes = [np.unique(np.append(points[:, k], ref[k])) for k in range(3)]
    vol = 0.0
    for i, j, k in itertools.product(*(range(len(a) - 1) for a in axes)):
        lo = np.array([axes[0][i], axes[1][j], axes[2][k]])
        hi = np.array([axes[0][i + 1], axes[1][j + 1], axes[2][k + 1]])
        if np.any(np.all(points <= lo, axis=1)):
            vol += np.prod(hi - lo)
    return vol


def test_hv3_exact_against_lattice():
    rng = np.random.default_rng(1)
    for _ in range(10):
        pts = rng.random((7, 3))
        ref = np.ones(3) * 1.1
        assert hv(pts, ref) == pytest.approx(_grid_hv3(pts, ref), rel=1e-12)


def test_hv_monte_carlo_matches_exact():
    rng = np.random.default_rng(2)
    pts = rng.random((10, 3))
    ref = np.full(3, 1.2)
    exact = hv(pts, ref, method="exact")
    est, se = hv_monte_carlo(pts, ref, 200_000, np.random.default_rng(0))
    assert abs(est - exact) <= 4 * se
    four = np.column_stack([pts, rng.random(10)])
    assert hv(four, np.full(4, 1.2)) > 0
    with pytest.raises(ValueError):
        hv(four, np.full(4, 1.2), method="exact")


def test_hv_invariances():
    rng = np.random.default_rng(3)
    pts = rng.random((12, 2))
    ref = np.array([1.5, 1.5])
    base = hv(pts, ref)
    assert hv(pts[::-1], ref) == pytest.approx(base)
    assert hv(np.vstack([pts, pts]), ref) == pytest.approx(base)
    assert hv(pts * 2, ref * 2) == pytest.approx(4 * base)


def test_nondominated_unique():
    pts = np.array([[1, 2], [1, 2], [2, 1], [3, 3], [np.nan, 0]], dtype=float)
    out = nondominated_unique(pts)
    assert {tuple(r) for r in out} == {(1.0, 2.0), (2.0, 1.0)}


# --- tables ------------------------------------------------------------------

def test_obj_table_equals_last_entry():
    rng = np.random.default_rng(0)
    data = random_archive(rng, P=2, A=2, R=3)
    res = compute_metric(data, "obj")
    i = 0
    for p, prob in enumerate(data.problems):
        for t in range(prob["T"]):
            for a in range(2):
                for r in range(3):
                    run = data.results[p][a][r]
                    want = run.obj[t][-1] if run.cv[t][-1] == 0 else np.nan
                    np.testing.assert_equal(res.table[i, a, r], want)
                    if run.cv[t][-1] == 0:
                        assert np.all(np.diff(res.converge[i, a, r][~np.isnan(res.converge[i, a, r])]) <= 0)
            i += 1
    assert res.row_names[0] == f"{data.problems[0]['name']}-T1"


def test_obj_hand_fixture():
    data = _archive([[[[3.0]]], [[[7.0, 1.0]]]])
    res = compute_metric(data, "obj")
    assert res.table.shape == (3, 1, 1)
    np.testing.assert_array_equal(res.table[:, 0, 0], [3.0, 7.0, 1.0])


def test_cv_fixture():
    data = _archive([[[[1.0]]]])
    assert np.all(compute_metric(data, "cv").table == 0)
    data.results[0][0][0].cv[0][:] = 0.3
    res = compute_metric(data, "cv")
    assert res.table[0, 0, 0] == pytest.approx(0.3)
    assert np.isnan(compute_metric(data, "obj").table[0, 0, 0])


def test_mts_hand_and_invariance():
    data = _archive([[[[1.0], [3.0]], [[2.0], [6.0]]]])
    pool = np.array([1.0, 3.0, 2.0, 6.0])
    z = (pool - pool.mean()) / pool.std()
    res = compute_metric(data, "mts")
    np.testing.assert_allclose(res.table[0], z.reshape(2, 2))
    shifted = _archive([[[[11.0], [13.0]], [[12.0], [16.0]]]])
    np.testing.assert_allclose(compute_metric(shifted, "mts").table, res.table)
    same = _archive([[[[1.0], [3.0]], [[1.0], [3.0]]]])
    np.testing.assert_allclose(compute_metric(same, "mts").table.mean(axis=2), 0.0)
    flat = _archive([[[[5.0]], [[5.0]]]])
    assert np.all(compute_metric(flat, "mts").table == 0)


def test_uv_hand():
    data = _archive([[[[1.0, 10.0], [2.0, 30.0]], [[4.0, 20.0], [3.0, 50.0]]]])
    res = compute_metric(data, "uv")
    u1 = (np.array([[1, 2], [4, 3]]) - 1) / 3
    u2 = (np.array([[10, 30], [20, 50]]) - 10) / 40
    np.testing.assert_allclose(res.table[0], (u1 + u2) / 2)
    best = _archive([[[[0.0, 0.0]], [[1.0, 5.0]]]])
    np.testing.assert_array_equal(compute_metric(best, "uv").table[0, :, 0], [0.0, 1.0])


def test_runtime_passthrough():
    rt = np.arange(6, dtype=float).reshape(1, 2, 3)
    data = _archive([[[[1.0]] * 3] * 2], run_times=rt)
    res = compute_metric(data, "runtime")
    np.testing.assert_array_equal(res.table, rt)
    assert res.table.shape == (1, 2, 3) and np.all(res.table >= 0)


def _mo_archive(points, cv=None):
    prob = problem_meta("MO", T=1, M=2, dims=(2,), front=True)
    G = 1
    obj = np.asarray(points, float)[None]
    run = RunResult([obj], [np.zeros((G, len(points))) if cv is None else np.asarray(cv, float)[None]], None,
                    np.array([1000]), 0.0, 1, 0, True)
    return ExperimentData([{"name": "A1", "algorithm": "MO-MFEA", "params": {}}], [prob], [[[run]]],
                          np.zeros((1, 1, 1)), 1, G, False, 1, [1])


def test_mo_tables():
    front = problem_meta("MO", T=1, M=2, dims=(2,), front=True)["optimum"][0].data
    data = _mo_archive(front)
    assert compute_metric(data, "igd").table[0, 0, 0] == pytest.approx(0.0, abs=1e-12)
    res = compute_metric(data, "hv")
    assert res.orientation == "Max"
    from mtobench.problems import reference_point

    assert res.table[0, 0, 0] == pytest.approx(hv(front, reference_point(front)))
    bad = _mo_archive([[0.0, 0.0], [2.0, 2.0]], cv=[1.0, 0.0])
    assert compute_metric(bad, "igd").pareto[0][0][0].tolist() == [[2.0, 2.0]]
    none = _mo_archive([[0.0, 0.0]], cv=[1.0])
    assert np.isnan(compute_metric(none, "igd+").table[0, 0, 0])


def test_mo_random_archive_shapes():
    rng = np.random.default_rng(5)
    data = random_archive(rng, P=2, A=3, R=2, G=4, mo=True)
    for name in ("igd", "igd+", "hv"):
        res = compute_metric(data, name)
        assert res.table.shape[1:] == (3, 2) and res.converge.shape[-1] == 4
    assert mo_result(rng, 1, 2, [3]).obj[0].shape == (2, 6, 2)


def test_compute_metric_cache_and_errors():
    rng = np.random.default_rng(6)
    data = random_archive(rng)
    res = compute_metric(data, "obj")
    assert data.metrics["obj"] is res
    fresh = compute_metric(data, "obj", attach=False)
    np.testing.assert_array_equal(fresh.table, res.table)
    with pytest.raises(UnknownMetricError) as err:
        compute_metric(data, "bogus")
    assert all(name in str(err.value) for name in METRICS)
