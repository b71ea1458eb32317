"""SVG figures: convergence curves with a confidence band, Pareto scatters, task landscapes."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .core import ProblemInstance  # noqa: E402
from .metrics import igd, nondominated_unique  # noqa: E402
from .problems import sample_landscape  # noqa: E402

# fixed hash salt and no date metadata keep SVG output byte-stable
plt.rcParams["svg.hashsalt"] = "mtobench"
_SVG_META = {"Date": None}


def confidence_band(series) -> tuple[np.ndarray, np.ndarray]:
    """Mean and 95% half-width ``1.96 * s / sqrt(R)`` over reps, ``series`` shaped ``(R, G)``.

    ``s`` is the sample standard deviation; with a single rep the band is zero.
    Missing values are ignored per checkpoint.
    """
    s = np.asarray(series, dtype=float)
    if s.ndim == 1:
        s = s[None, :]
    valid = ~np.isnan(s)
    n = valid.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(n > 0, np.nansum(s, axis=0) / np.maximum(n, 1), np.nan)
        dev = np.where(valid, s - mean, 0.0)
        var = np.where(n > 1, (dev**2).sum(axis=0) / np.maximum(n - 1, 1), 0.0)
        half = 1.96 * np.sqrt(var) / np.sqrt(np.maximum(n, 1))
    return mean, half


def log_clip(values, floor: float | None) -> tuple[np.ndarray, bool]:
    """``log10`` of ``values`` with nonpositive entries raised to ``floor`` first."""
    v = np.asarray(values, dtype=float).copy()
    clipped = bool(np.any(v[~np.isnan(v)] <= 0))
    if floor is not None:
        v[v <= 0] = floor
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log10(v), clipped


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return path


def _select(names, wanted):
    if wanted is None:
        return list(range(len(names)))
    out = []
    for w in [wanted] if isinstance(wanted, (str, int)) else wanted:
        out.append(names.index(w) if isinstance(w, str) else int(w))
    return out


def plot_convergence(result, path, rows=None, cols=None, log_y: bool = True, ci_band: bool = True) -> Path:
    """Mean metric trajectory per algorithm against evaluations, one panel per row."""
    if result.converge is None:
        raise ValueError(f"metric {result.name!r} has no convergence data")
    row_idx = _select(result.row_names, rows)
    col_idx = _select(result.column_names, cols)
    fig, axes = plt.subplots(len(row_idx), 1, figsize=(6, 3.2 * len(row_idx)), squeeze=False)
    clipped_any = False
    for ax, i in zip(axes[:, 0], row_idx):
        x = result.converge_fe[i] if result.converge_fe is not None else np.arange(result.converge.shape[-1])
        data = result.converge[i][col_idx]
        positive = data[np.isfinite(data) & (data > 0)]
        floor = float(positive.min()) if positive.size else None
        for j, c in enumerate(col_idx):
            mean, half = confidence_band(data[j])
            lo, hi = mean - half, mean + half
            if log_y:
                (mean, c1), (lo, c2), (hi, c3) = (log_clip(v, floor) for v in (mean, lo, hi))
                clipped_any |= c1 or (ci_band and (c2 or c3))
            line, = ax.plot(x, mean, label=result.column_names[c], linewidth=1.4)
            if ci_band:
                ax.fill_between(x, lo, hi, color=line.get_color(), alpha=0.2, linewidth=0)
        ax.set_title(result.row_names[i])
        ax.set_xlabel("evaluations")
        ax.set_ylabel(f"log10({result.name})" if log_y else result.name)
        ax.legend(fontsize=8)
    if clipped_any:
        fig.text(0.01, 0.005, "note: nonpositive values clipped to the smallest positive value before log10",
                 fontsize=7)
    fig.tight_layout()
    return _save(fig, path)


def _median_rep(nd_sets, front):
    scores = [igd(s, front) if s is not None and len(s) else np.inf for s in nd_sets]
    order = np.argsort(scores, kind="stable")
    return int(order[(len(order) - 1) // 2])


def plot_pareto(data, path, problem, task: int = 0, algorithms=None, rep: int | None = None) -> Path:
    """Final non-dominated feasible objectives of one run per algorithm, with the true front if known.

    The run shown is ``rep`` or, when a front is known, the median-IGD rep.
    """
    p = _select(data.problem_names, problem)[0]
    prob = data.problems[p]
    opt = prob["optimum"][task]
    front = opt.data if opt is not None and opt.kind == "front" else None
    m = prob["M"][task]
    fig = plt.figure(figsize=(5.5, 4.5))
    ax = fig.add_subplot(projection="3d") if m == 3 else fig.add_subplot()
    for a in _select(data.algorithm_names, algorithms):
        sets = []
        for r in range(data.reps):
            res = data.results[p][a][r]
            if res is None:
                sets.append(None)
                continue
            obj, cv = res.obj[task][-1], res.cv[task][-1]
            sets.append(nondominated_unique(obj[cv <= 0]))
        if not sets:
            continue
        r = rep if rep is not None else (_median_rep(sets, front) if front is not None else 0)
        pts = sets[r]
        if pts is None or not len(pts):
            continue
        if m == 2:
            ax.scatter(pts[:, 0], pts[:, 1], s=12, label=data.algorithm_names[a])
        elif m == 3:
            ax.scatter(pts[:, 0], pts[:, 1], pts[:, 2], s=12, label=data.algorithm_names[a])
        else:
            for row in pts:
                ax.plot(np.arange(1, m + 1), row, linewidth=0.6, alpha=0.6)
    if front is not None and m in (2, 3):
        f = front[np.argsort(front[:, 0])]
        if m == 2:
            ax.plot(f[:, 0], f[:, 1], color="black", linewidth=1.0, label="true front")
        else:
            ax.scatter(f[:, 0], f[:, 1], f[:, 2], s=1, color="black", label="true front")
    ax.set_title(f"{prob['name']} T{task + 1}")
    ax.set_xlabel("f1")
    ax.set_ylabel("f2" if m < 4 else "objective value")
    if m <= 3:
        ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_landscape(problem: ProblemInstance, path, task: int = 0, mode: str = "1D", resolution: int = 101) -> Path:
    """Objective landscape over the first unified coordinates; infeasible regions hatched."""
    grid = sample_landscape(problem, task, mode, resolution)
    obj = grid["obj"] if grid["obj"].ndim == len(grid["axes"]) else grid["obj"][..., 0]
    feas = grid["feasible"]
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    if mode == "1D":
        x = grid["axes"][0]
        ax.plot(x, obj, linewidth=1.2)
        if not feas.all():
            ax.fill_between(x, np.nanmin(obj), np.nanmax(obj), where=~feas, color="grey", alpha=0.3,
                            label="infeasible")
            ax.legend(fontsize=8)
        ax.set_xlabel("unified x1")
        ax.set_ylabel("objective")
    else:
        x, y = grid["axes"]
        cs = ax.contourf(x, y, obj.T, levels=30)
        fig.colorbar(cs, ax=ax)
        if not feas.all() and feas.any():
            ax.contourf(x, y, (~feas).T.astype(float), levels=[0.5, 1.5], colors="none", hatches=["//"])
            ax.contour(x, y, feas.T.astype(float), levels=[0.5], colors="white", linewidths=0.8)
        ax.set_xlabel("unified x1")
        ax.set_ylabel("unified x2")
    ax.set_title(f"{problem.name} T{task + 1}")
    fig.tight_layout()
    return _save(fig, path)


__all__ = ["confidence_band", "log_clip", "plot_convergence", "plot_pareto", "plot_landscape"]
