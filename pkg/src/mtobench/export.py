"""Exports: metric tables (CSV / TeX), IOHanalyzer-style CSVs, best decision vectors.

IOH export layout (one directory per call)::

    index.json                      list of file records (problem, task, algorithm, ...)
    <problem>-T<k>__<algorithm>.csv columns evaluations,raw_y,run_id

Each CSV holds one block per rep (``run_id`` 1..R) of best-so-far values at
checkpoint granularity. Checkpoints that share an evaluation count (one
generation crossing several thresholds) appear once, so evaluations are
strictly increasing within a block. ``raw_y`` is written with full
round-trip precision; it is ``nan`` while no feasible solution exists.
"""

from __future__ import annotations

import csv
import io
import json
import re
import warnings
from pathlib import Path

import numpy as np

from .datastore import ExperimentData
from .metrics import MetricResult
from .operators import nondominated_sort
from .stats import TestReport

SHOW = ("mean_std", "median", "best")


class ExportError(ValueError):
    """The archive lacks the data an export needs."""


_TEX_SPECIAL = {
    "\\": r"\textbackslash{}", "&": r"\&", "%": r"\%", "$": r"\$", "#": r"\#", "_": r"\_",
    "{": r"\{", "}": r"\}", "~": r"\textasciitilde{}", "^": r"\textasciicircum{}",
}
_TEX_RE = re.compile("|".join(re.escape(k) for k in _TEX_SPECIAL))


def tex_escape(text: str) -> str:
    return _TEX_RE.sub(lambda m: _TEX_SPECIAL[m.group()], str(text))


def _fmt(v: float) -> str:
    return "NaN" if np.isnan(v) else f"{v:.2e}"


def cell_value(sample, show: str, orientation: str) -> tuple[float, float | None]:
    """``(value, spread)`` of one cell; spread is the sample std for ``mean_std``."""
    s = np.asarray(sample, dtype=float)
    s = s[~np.isnan(s)]
    if s.size == 0:
        return float("nan"), (float("nan") if show == "mean_std" else None)
    if show == "mean_std":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            std = float(np.std(s, ddof=1)) if s.size > 1 else 0.0
        return float(np.mean(s)), std
    if show == "median":
        return float(np.median(s)), None
    if show == "best":
        return float(s.min() if orientation == "Min" else s.max()), None
    raise ValueError(f"show must be one of {SHOW}")


def format_cell(sample, show: str, orientation: str, marker: str = "", tex: bool = False) -> str:
    value, spread = cell_value(sample, show, orientation)
    text = _fmt(value)
    if spread is not None:
        text += (r"$\pm$" if tex else "±") + _fmt(spread)
    if marker:
        text += f" ({'$-$' if tex and marker == '-' else marker})"
    return text


def table_rows(result: MetricResult, report: TestReport | None = None, show: str = "mean_std",
               tex: bool = False) -> list[list[str]]:
    """Header plus one row per metric row (plus a ``+/-/=`` tally when ``report`` is given)."""
    if show not in SHOW:
        raise ValueError(f"show must be one of {SHOW}")
    esc = tex_escape if tex else str
    header = [esc(f"{result.name} ({result.orientation})")] + [esc(c) for c in result.column_names]
    rows = [header]
    for i, name in enumerate(result.row_names):
        row = [esc(name)]
        for j in range(len(result.column_names)):
            marker = report.markers[i][j] if report is not None else ""
            row.append(format_cell(result.table[i, j], show, result.orientation, marker, tex))
        rows.append(row)
    if report is not None:
        tally = report.summary()
        row = [esc("+/-/=")]
        for j, col in enumerate(result.column_names):
            c = tally.get(col)
            row.append("" if c is None else f"{c['+']}/{c['-']}/{c['=']}")
        rows.append(row)
    return rows


def render_csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def render_tex(rows) -> str:
    k = len(rows[0])
    lines = [r"\begin{tabular}{l" + "c" * (k - 1) + "}", r"\hline", " & ".join(rows[0]) + r" \\", r"\hline"]
    lines += [" & ".join(r) + r" \\" for r in rows[1:]]
    lines += [r"\hline", r"\end{tabular}", ""]
    return "\n".join(lines)


def export_table(result: MetricResult, path=None, report: TestReport | None = None, fmt: str = "csv",
                 show: str = "mean_std") -> str:
    """Render a metric table as CSV or a TeX ``tabular`` fragment; write it when ``path`` is given."""
    if fmt not in ("csv", "tex"):
        raise ValueError("format must be 'csv' or 'tex'")
    rows = table_rows(result, report, show, tex=fmt == "tex")
    text = render_csv(rows) if fmt == "csv" else render_tex(rows)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._+-]", "_", name)


def _float_text(v: float) -> str:
    return "nan" if np.isnan(v) else repr(float(v))


def ioh_blocks(data: ExperimentData, p: int, t: int, a: int) -> list[list[tuple[int, float]]]:
    """Per rep: ``(evaluations, best-so-far feasible objective)`` with duplicate counts removed."""
    blocks = []
    for r in range(data.reps):
        res = data.results[p][a][r]
        if res is None:
            blocks.append([])
            continue
        y = np.where(res.cv[t] == 0, res.obj[t], np.nan)
        rows = []
        for fe, v in zip(res.fe, y):
            if rows and rows[-1][0] == int(fe):
                rows[-1] = (int(fe), float(v))
            else:
                rows.append((int(fe), float(v)))
        blocks.append(rows)
    return blocks


def export_ioh(data: ExperimentData, out_dir) -> list[Path]:
    """Write best-so-far CSVs for every single-objective (problem, task, algorithm) and an index."""
    out_dir = Path(out_dir)
    pending = []
    index = []
    for p, prob in enumerate(data.problems):
        if max(prob["M"]) > 1:
            continue
        for t in range(prob["T"]):
            for a, alg in enumerate(data.algorithm_names):
                fname = f"{_safe(prob['name'])}-T{t + 1}__{_safe(alg)}.csv"
                rows = [("evaluations", "raw_y", "run_id")]
                for r, block in enumerate(ioh_blocks(data, p, t, a), start=1):
                    rows += [(fe, _float_text(v), r) for fe, v in block]
                pending.append((fname, render_csv(rows)))
                index.append({"file": fname, "problem": prob["name"], "task": t + 1, "algorithm": alg,
                              "dimension": prob["D"][t], "max_fe": prob["max_fe"], "reps": data.reps,
                              "seeds": data.seeds, "orientation": "Min"})
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for fname, text in pending:
        (out_dir / fname).write_text(text, encoding="utf-8")
        written.append(out_dir / fname)
    (out_dir / "index.json").write_text(json.dumps({"format": "mtobench-ioh", "version": 1, "files": index},
                                                   indent=2), encoding="utf-8")
    written.append(out_dir / "index.json")
    return written


def read_ioh_csv(path) -> dict[int, list[tuple[int, float]]]:
    """Parse an exported CSV back into ``{run_id: [(evaluations, raw_y), ...]}``."""
    blocks: dict[int, list] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            blocks.setdefault(int(row["run_id"]), []).append((int(row["evaluations"]), float(row["raw_y"])))
    return blocks


def _tolist(a):
    return [[float(v) for v in row] for row in np.atleast_2d(a)]


def best_dec_document(data: ExperimentData) -> dict:
    """Structured best decision vectors (native space) for every run."""
    if not data.save_dec:
        raise ExportError("archive was recorded without decision vectors (save_dec is off)")
    problems = []
    for p, prob in enumerate(data.problems):
        multi = max(prob["M"]) > 1
        tasks = []
        for t in range(prob["T"]):
            algs = []
            for a, alg in enumerate(data.algorithm_names):
                reps = []
                for r in range(data.reps):
                    res = data.results[p][a][r]
                    if res is None:
                        reps.append({"rep": r + 1, "seed": data.seeds[r], "failed": True, "dec": [], "obj": []})
                        continue
                    if multi:
                        obj, cv, dec = res.obj[t][-1], res.cv[t][-1], res.dec[t][-1]
                        keep = np.flatnonzero(cv <= 0)
                        if len(keep):
                            keep = keep[nondominated_sort(obj[keep]) == 0]
                            # identical objective vectors are reported once
                            _, first = np.unique(obj[keep], axis=0, return_index=True)
                            keep = keep[np.sort(first)]
                        entry = {"dec": _tolist(dec[keep]) if len(keep) else [],
                                 "obj": _tolist(obj[keep]) if len(keep) else [], "feasible": bool(len(keep))}
                    else:
                        entry = {"dec": _tolist(res.dec[t][-1]), "obj": [[float(res.obj[t][-1])]],
                                 "feasible": bool(res.cv[t][-1] == 0), "cv": float(res.cv[t][-1])}
                    reps.append({"rep": r + 1, "seed": data.seeds[r], "failed": False, **entry})
                algs.append({"name": alg, "reps": reps})
            tasks.append({"task": t + 1, "dimension": prob["D"][t], "algorithms": algs})
        problems.append({"name": prob["name"], "multiobjective": multi, "tasks": tasks})
    return {"format": "mtobench-best-dec", "version": 1, "problems": problems}


def export_best_dec(data: ExperimentData, out_path) -> Path:
    doc = best_dec_document(data)
    out_path = Path(out_path)
    out_path.write_text(json.dumps(doc, indent=1, allow_nan=False), encoding="utf-8")
    return out_path


__all__ = [
    "ExportError", "export_table", "export_ioh", "export_best_dec", "best_dec_document", "read_ioh_csv",
    "ioh_blocks", "tex_escape", "format_cell", "table_rows",
]
