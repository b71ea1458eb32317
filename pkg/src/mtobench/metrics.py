"""Performance metrics computed from an experiment archive.

Each ``metric_*`` function takes an :class:`~mtobench.datastore.ExperimentData`
and returns a :class:`MetricResult` whose table has one row per problem (or
problem task), one column per algorithm and one slice per repetition.
Failed runs appear as NaN.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from . import _kernels
from .core import Optimum, checkpoint_thresholds
from .operators import nondominated_sort

if TYPE_CHECKING:
    from .datastore import ExperimentData

MC_SAMPLES = 100_000


@dataclass(eq=False)
class MetricResult:
    name: str
    orientation: str
    row_names: list
    column_names: list
    table: np.ndarray
    converge: np.ndarray | None = None
    converge_fe: np.ndarray | None = None
    pareto: list | None = None

    def __post_init__(self):
        if self.orientation not in ("Min", "Max"):
            raise ValueError("orientation must be 'Min' or 'Max'")
        self.table = np.asarray(self.table, dtype=float)
        if self.table.shape[:2] != (len(self.row_names), len(self.column_names)):
            raise ValueError("table shape does not match row/column names")

    @property
    def reps(self) -> int:
        return self.table.shape[2]

    def cell(self, row, col) -> np.ndarray:
        r = self.row_names.index(row) if isinstance(row, str) else row
        c = self.column_names.index(col) if isinstance(col, str) else col
        return self.table[r, c]


# --- indicators --------------------------------------------------------------

def nondominated_unique(points) -> np.ndarray:
    """Rows of ``points`` on the first front, duplicates removed."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    pts = pts[np.all(np.isfinite(pts), axis=1)]
    if len(pts) == 0:
        return pts
    pts = pts[nondominated_sort(pts) == 0]
    return np.unique(pts, axis=0)


def igd(front, reference) -> float:
    """Mean distance from each reference point to the nearest achieved point."""
    front = np.atleast_2d(np.asarray(front, dtype=float))
    if front.shape[0] == 0:
        return float("nan")
    return float(np.mean(_kernels.min_distances(reference, front, False)))


def igd_plus(front, reference) -> float:
    """IGD with dominance-aware distance ``|max(a - z, 0)|``."""
    front = np.atleast_2d(np.asarray(front, dtype=float))
    if front.shape[0] == 0:
        return float("nan")
    return float(np.mean(_kernels.min_distances(reference, front, True)))


def _hv3(points, ref):
    # slice along the third objective; each slab contributes a 2-D area
    pts = points[np.argsort(points[:, 2], kind="stable")]
    volume = 0.0
    for i in range(len(pts)):
        top = pts[i + 1, 2] if i + 1 < len(pts) else ref[2]
        height = top - pts[i, 2]
        if height > 0:
            volume += _kernels.hv2d(pts[: i + 1, :2], ref[:2]) * height
    return volume


def hv_monte_carlo(front, ref, n_samples: int = MC_SAMPLES, rng=None) -> tuple[float, float]:
    """Monte Carlo hypervolume estimate and its standard error.

    Samples are uniform in the box spanned by the front's ideal point and
    ``ref``; the estimator is ``V * p`` with standard error ``V * sqrt(p (1 - p) / n)``.
    """
    ref = np.asarray(ref, dtype=float)
    pts = nondominated_unique(front)
    pts = pts[np.all(pts < ref, axis=1)] if len(pts) else pts
    if len(pts) == 0:
        return 0.0, 0.0
    rng = np.random.default_rng(0) if rng is None else rng
    lo = pts.min(axis=0)
    volume = float(np.prod(ref - lo))
    hits = 0
    chunk = 20_000
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        s = lo + rng.random((m, len(ref))) * (ref - lo)
        dominated = np.any(np.all(pts[None, :, :] <= s[:, None, :], axis=2), axis=1)
        hits += int(dominated.sum())
        done += m
    p = hits / n_samples
    return volume * p, volume * np.sqrt(p * (1.0 - p) / n_samples)


def hv(front, ref, method: str = "auto", n_samples: int = MC_SAMPLES, rng=None) -> float:
    """Hypervolume dominated by ``front`` and bounded by ``ref`` (minimization).

    ``method="auto"`` is exact for two and three objectives and Monte Carlo
    beyond; ``"mc"`` forces the estimator.
    """
    ref = np.asarray(ref, dtype=float)
    pts = nondominated_unique(front)
    if len(pts):
        pts = pts[np.all(pts < ref, axis=1)]
    if len(pts) == 0:
        return 0.0
    m = len(ref)
    if method == "mc" or (method == "auto" and m > 3):
        return hv_monte_carlo(pts, ref, n_samples, rng)[0]
    if m == 1:
        return float(ref[0] - pts[:, 0].min())
    if m == 2:
        return float(_kernels.hv2d(pts, ref))
    if m == 3:
        return float(_hv3(pts, ref))
    raise ValueError("exact hypervolume is implemented for up to three objectives")


# --- table builders ----------------------------------------------------------

def _so_rows(data):
    for p, prob in enumerate(data.problems):
        if max(prob["M"]) == 1:
            for t in range(prob["T"]):
                yield p, t, f"{prob['name']}-T{t + 1}"


def _mo_rows(data, need_front=False):
    for p, prob in enumerate(data.problems):
        if max(prob["M"]) > 1:
            for t in range(prob["T"]):
                opt = prob["optimum"][t]
                if need_front and (opt is None or opt.kind != "front"):
                    continue
                yield p, t, f"{prob['name']}-T{t + 1}"


def _fe_axis(data, p):
    return checkpoint_thresholds(data.problems[p]["max_fe"], data.G)


def _so_metric(data, which, name):
    rows = list(_so_rows(data))
    A, R, G = data.A, data.reps, data.G
    table = np.full((len(rows), A, R), np.nan)
    conv = np.full((len(rows), A, R, G), np.nan)
    for i, (p, t, _) in enumerate(rows):
        for a in range(A):
            for r in range(R):
                res = data.results[p][a][r]
                if res is None:
                    continue
                obj, cv = res.obj[t], res.cv[t]
                series = np.where(cv == 0, obj, np.nan) if which == "obj" else cv
                conv[i, a, r] = series
                table[i, a, r] = series[-1]
    fe = np.array([_fe_axis(data, p) for p, _, _ in rows]).reshape(len(rows), G)
    return MetricResult(name, "Min", [r[2] for r in rows], data.algorithm_names, table, conv, fe)


def metric_obj(data: "ExperimentData") -> MetricResult:
    """Best feasible objective per (problem, task); NaN where no feasible solution was found."""
    return _so_metric(data, "obj", "obj")


def metric_cv(data: "ExperimentData") -> MetricResult:
    """Constraint violation of the best individual per (problem, task)."""
    return _so_metric(data, "cv", "cv")


def _final_objectives(data, p):
    """``(A, R, T)`` final best feasible objectives of one problem."""
    T = data.problems[p]["T"]
    out = np.full((data.A, data.reps, T), np.nan)
    for a in range(data.A):
        for r in range(data.reps):
            res = data.results[p][a][r]
            if res is None:
                continue
            for t in range(T):
                if res.cv[t][-1] == 0:
                    out[a, r, t] = res.obj[t][-1]
    return out


def _pooled_rows(data, transform, name):
    rows, tables = [], []
    for p, prob in enumerate(data.problems):
        if max(prob["M"]) > 1:
            continue
        y = _final_objectives(data, p)
        scores = np.full_like(y, np.nan)
        for t in range(y.shape[2]):
            pool = y[:, :, t]
            finite = pool[np.isfinite(pool)]
            if finite.size:
                scores[:, :, t] = transform(pool, finite)
        with np.errstate(invalid="ignore"):
            per_rep = np.nanmean(scores, axis=2) if y.shape[2] else scores[:, :, 0]
        rows.append(prob["name"])
        tables.append(per_rep)
    table = np.stack(tables) if tables else np.empty((0, data.A, data.reps))
    return MetricResult(name, "Min", rows, data.algorithm_names, table)


def _zscore(pool, finite):
    mu = finite.mean()
    sigma = finite.std()
    if sigma == 0:
        return np.where(np.isfinite(pool), 0.0, np.nan)
    return (pool - mu) / sigma


def _unit_range(pool, finite):
    lo, hi = finite.min(), finite.max()
    if hi == lo:
        return np.where(np.isfinite(pool), 0.0, np.nan)
    return (pool - lo) / (hi - lo)


def metric_mts(data: "ExperimentData") -> MetricResult:
    """Multitask score: per-task z-scores over the pooled algorithms x reps, averaged over tasks.

    The table keeps one value per rep (task-averaged z); its mean over reps
    is the score of an algorithm on a problem.
    """
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return _pooled_rows(data, _zscore, "mts")


def metric_uv(data: "ExperimentData") -> MetricResult:
    """Unified value: per-task min-max normalization over the pooled data, averaged over tasks."""
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return _pooled_rows(data, _unit_range, "uv")


def _final_set(objs, cv):
    objs = np.asarray(objs, dtype=float)
    feasible = objs[np.asarray(cv) <= 0]
    return nondominated_unique(feasible) if len(feasible) else feasible


def _mo_metric(data, name, orientation, indicator, need_front):
    rows = list(_mo_rows(data, need_front))
    A, R, G = data.A, data.reps, data.G
    table = np.full((len(rows), A, R), np.nan)
    conv = np.full((len(rows), A, R, G), np.nan)
    pareto = [[[None] * R for _ in range(A)] for _ in rows]
    for i, (p, t, _) in enumerate(rows):
        opt = data.problems[p]["optimum"][t]
        for a in range(A):
            for r in range(R):
                res = data.results[p][a][r]
                if res is None:
                    continue
                for g in range(G):
                    nd = _final_set(res.obj[t][g], res.cv[t][g])
                    conv[i, a, r, g] = indicator(nd, opt) if len(nd) else np.nan
                    if g == G - 1:
                        pareto[i][a][r] = nd
                table[i, a, r] = conv[i, a, r, -1]
    fe = np.array([_fe_axis(data, p) for p, _, _ in rows]).reshape(len(rows), G)
    return MetricResult(name, orientation, [r[2] for r in rows], data.algorithm_names, table, conv, fe, pareto)


def metric_igd(data: "ExperimentData") -> MetricResult:
    return _mo_metric(data, "igd", "Min", lambda nd, opt: igd(nd, opt.data), True)


def metric_igd_plus(data: "ExperimentData") -> MetricResult:
    return _mo_metric(data, "igd+", "Min", lambda nd, opt: igd_plus(nd, opt.data), True)


def _hv_indicator(nd, opt: Optimum | None):
    from .problems import hv_reference

    ref = hv_reference(opt)
    if ref is None:
        return np.nan
    return hv(nd, ref)


def metric_hv(data: "ExperimentData") -> MetricResult:
    return _mo_metric(data, "hv", "Max", _hv_indicator, False)


def metric_runtime(data: "ExperimentData") -> MetricResult:
    """Wall-clock seconds per run."""
    return MetricResult("runtime", "Min", data.problem_names, data.algorithm_names,
                        np.array(data.run_times, dtype=float).reshape(data.P, data.A, data.reps))


METRICS = {
    "obj": metric_obj,
    "cv": metric_cv,
    "mts": metric_mts,
    "uv": metric_uv,
    "igd": metric_igd,
    "igd+": metric_igd_plus,
    "hv": metric_hv,
    "runtime": metric_runtime,
}


class UnknownMetricError(KeyError):
    def __str__(self):
        return self.args[0]


def compute_metric(data: "ExperimentData", name: str, attach: bool = True) -> MetricResult:
    """Compute a registered metric; cache it in ``data.metrics`` when ``attach``."""
    try:
        fn = METRICS[name]
    except KeyError:
        raise UnknownMetricError(f"unknown metric {name!r}; available: {', '.join(METRICS)}") from None
    result = fn(data)
    if attach:
        data.metrics[name] = result
    return result
