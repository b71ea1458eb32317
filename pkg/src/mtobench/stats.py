"""Nonparametric comparison of algorithms over metric tables.

All tests use normal approximations with continuity correction at every
sample size. No multiple-comparison correction is applied.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2, norm, rankdata

ALPHA = 0.05


def ranksum(x, y) -> float:
    """Two-sided Wilcoxon rank-sum (Mann-Whitney) p-value.

    Average ranks for ties, tie-corrected variance and a 0.5 continuity
    correction (the corrected deviation is clamped at zero).
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    n1, n2 = len(x), len(y)
    if n1 == 0 or n2 == 0:
        return 1.0
    n = n1 + n2
    ranks = rankdata(np.concatenate([x, y]))
    w = ranks[:n1].sum()
    mu = n1 * (n + 1) / 2.0
    _, counts = np.unique(ranks, return_counts=True)
    tie = float(np.sum(counts**3 - counts))
    var = n1 * n2 / 12.0 * ((n + 1) - tie / (n * (n - 1))) if n > 1 else 0.0
    if var <= 0:
        return 1.0
    z = max(abs(w - mu) - 0.5, 0.0) / math.sqrt(var)
    return float(min(1.0, 2.0 * norm.sf(z)))


def signrank(x, y) -> float:
    """Two-sided Wilcoxon signed-rank p-value for paired samples.

    Zero differences are discarded; all-zero differences give ``p = 1``.
    """
    d = np.asarray(x, dtype=float).ravel() - np.asarray(y, dtype=float).ravel()
    d = d[d != 0]
    n = len(d)
    if n == 0:
        return 1.0
    ranks = rankdata(np.abs(d))
    w_plus = ranks[d > 0].sum()
    mu = n * (n + 1) / 4.0
    _, counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(counts**3 - counts)) / 48.0
    if var <= 0:
        return 1.0
    z = max(abs(w_plus - mu) - 0.5, 0.0) / math.sqrt(var)
    return float(min(1.0, 2.0 * norm.sf(z)))


TESTS = {"ranksum": ranksum, "signrank": signrank}


@dataclass
class TestReport:
    """Outcome of a comparison against a base algorithm.

    ``p_values`` and ``markers`` are ``rows x algorithms``; the base column
    holds NaN and an empty marker. Friedman fields are filled only by
    :func:`friedman`.
    """

    test: str
    base: int
    column_names: list
    row_names: list = field(default_factory=list)
    p_values: np.ndarray | None = None
    markers: list | None = None
    chi2: float | None = None
    chi2_p: float | None = None
    mean_ranks: np.ndarray | None = None
    posthoc_z: np.ndarray | None = None
    posthoc_p: np.ndarray | None = None
    mode: str | None = None

    def summary(self) -> dict:
        """Count of ``+``/``-``/``=`` per algorithm column."""
        out = {}
        if self.markers is None:
            return out
        for j, name in enumerate(self.column_names):
            if j == self.base:
                continue
            col = [row[j] for row in self.markers]
            out[name] = {m: col.count(m) for m in "+-="}
        return out


def _oriented(values, orientation):
    v = np.asarray(values, dtype=float)
    v = v if orientation == "Min" else -v
    return np.where(np.isnan(v), np.inf, v)


def _base_index(base, names):
    if isinstance(base, str):
        if base not in names:
            raise ValueError(f"unknown base algorithm {base!r}")
        return names.index(base)
    return int(base)


def friedman(table, mode: str = "mean", base=0, orientation: str = "Min",
             column_names=None) -> TestReport:
    """Friedman test over blocks with a post-hoc z-test of every algorithm vs ``base``.

    ``table`` is ``rows x k`` or ``rows x k x reps``. In ``"mean"`` mode each
    row (averaged over reps) is one block; in ``"all-reps"`` mode every
    (row, rep) pair is a block. Rank 1 is best under ``orientation``; missing
    values rank last.
    """
    t = np.asarray(table, dtype=float)
    if t.ndim == 2:
        t = t[:, :, None]
    if mode == "mean":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            blocks = np.nanmean(t, axis=2)
    elif mode == "all-reps":
        blocks = np.transpose(t, (0, 2, 1)).reshape(-1, t.shape[1])
    else:
        raise ValueError("mode must be 'mean' or 'all-reps'")
    n, k = blocks.shape
    names = list(column_names) if column_names is not None else [str(j) for j in range(k)]
    b = _base_index(base, names)
    ranks = np.vstack([rankdata(row) for row in _oriented(blocks, orientation)]) if n else np.zeros((0, k))
    mean_ranks = ranks.mean(axis=0) if n else np.full(k, (k + 1) / 2.0)
    stat = 12.0 * n / (k * (k + 1)) * float(np.sum((mean_ranks - (k + 1) / 2.0) ** 2)) if n else 0.0
    se = math.sqrt(k * (k + 1) / (6.0 * n)) if n else float("inf")
    z = (mean_ranks[b] - mean_ranks) / se
    p = 2.0 * norm.sf(np.abs(z))
    z[b], p[b] = np.nan, np.nan
    return TestReport("friedman", b, names, chi2=stat, chi2_p=float(chi2.sf(stat, k - 1)) if k > 1 else 1.0,
                      mean_ranks=mean_ranks, posthoc_z=z, posthoc_p=p, mode=mode)


def compare(sample, base_sample, orientation: str) -> str:
    """``+`` if ``sample`` is better than ``base_sample`` by median (then mean), ``-`` if worse."""
    s = _oriented(sample, orientation)
    r = _oriented(base_sample, orientation)
    for stat in (np.median, np.mean):
        with np.errstate(invalid="ignore"):
            a, c = stat(s), stat(r)
        if a < c:
            return "+"
        if a > c:
            return "-"
    return "="


def _paired(x, y, test):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if test == "signrank":
        keep = ~(np.isnan(x) | np.isnan(y))
        return x[keep], y[keep]
    return x[~np.isnan(x)], y[~np.isnan(y)]


def annotate(table, base=0, test: str = "ranksum", orientation: str | None = None,
             column_names=None, row_names=None, alpha: float = ALPHA) -> TestReport:
    """Mark each algorithm ``+``, ``-`` or ``=`` against ``base`` on every row.

    ``table`` is a ``rows x algorithms x reps`` array or a
    :class:`~mtobench.metrics.MetricResult` (which supplies names and
    orientation). A marker is ``+``/``-`` only when ``p < alpha``.
    """
    if hasattr(table, "table") and hasattr(table, "orientation"):
        column_names = table.column_names if column_names is None else column_names
        row_names = table.row_names if row_names is None else row_names
        orientation = table.orientation if orientation is None else orientation
        table = table.table
    orientation = orientation or "Min"
    if test not in TESTS:
        raise ValueError(f"unknown test {test!r}; available: {', '.join(TESTS)}")
    t = np.asarray(table, dtype=float)
    rows, k = t.shape[:2]
    names = list(column_names) if column_names is not None else [str(j) for j in range(k)]
    b = _base_index(base, names)
    pv = np.full((rows, k), np.nan)
    markers = []
    for i in range(rows):
        row = []
        for j in range(k):
            if j == b:
                row.append("")
                continue
            x, y = _paired(t[i, j], t[i, b], test)
            p = TESTS[test](x, y) if len(x) and len(y) else 1.0
            pv[i, j] = p
            row.append(compare(x, y, orientation) if p < alpha and len(x) and len(y) else "=")
        markers.append(row)
    return TestReport(test, b, names, list(row_names or [str(i) for i in range(rows)]), pv, markers)
