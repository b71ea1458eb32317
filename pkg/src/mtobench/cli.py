"""Command-line interface: ``mtobench <subcommand> ...``.

Failures print a single line ``error: <kind>: <message>`` to stderr and exit
with status 1 (usage errors exit with 2). Outputs are written only after
all validation has passed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import datastore
from .algorithms import ALGORITHMS
from .core import ConfigurationError
from .datastore import ArchiveError
from .export import ExportError, export_best_dec, export_ioh, export_table
from .metrics import METRICS, UnknownMetricError, compute_metric
from .problems import SUITES, build_suite, resolve_problems
from .runner import default_output, load_config, run_experiment
from .stats import annotate, friedman


def _metric(data, name):
    return data.metrics[name] if name in data.metrics else compute_metric(data, name, attach=False)


def cmd_run(args):
    overrides = {"reps": args.reps, "base_seed": args.seed, "workers": args.workers, "G": args.G,
                 "output": args.output}
    if args.serial:
        overrides["parallel"] = False
    if args.save_dec:
        overrides["save_dec"] = True
    config = load_config(args.config, **overrides)
    out = default_output(config, args.config)
    progress = None
    if args.verbose:
        def progress(p, a, r, error):
            print(f"run p={p} a={a} r={r + 1}" + (" FAILED" if error else ""), file=sys.stderr)
    data = run_experiment(config, progress=progress)
    datastore.save(data, out)
    print(f"wrote {out} ({data.P} problems x {data.A} algorithms x {data.reps} reps"
          + (f", {len(data.failures)} failed runs" if data.failures else "") + ")")
    return 0


def _print_table(result):
    width = max([len(r) for r in result.row_names] + [8])
    print(f"{result.name} ({result.orientation})".ljust(width) + "  " + "  ".join(
        f"{c:>12}" for c in result.column_names))
    with np.errstate(all="ignore"):
        means = np.nanmean(result.table, axis=2) if result.table.size else result.table[:, :, 0]
    for i, row in enumerate(result.row_names):
        print(row.ljust(width) + "  " + "  ".join(f"{v:12.4e}" for v in means[i]))


def cmd_metric(args):
    data = datastore.load(args.archive)
    result = compute_metric(data, args.name)
    _print_table(result)
    if not args.no_save:
        datastore.save(data, args.output or args.archive)
    return 0


def cmd_stats(args):
    data = datastore.load(args.archive)
    result = _metric(data, args.metric)
    if args.test == "friedman":
        report = friedman(result.table, args.mode, args.base, result.orientation, result.column_names)
        doc = {"test": "friedman", "mode": args.mode, "chi2": report.chi2, "p": report.chi2_p,
               "base": result.column_names[report.base],
               "mean_ranks": dict(zip(result.column_names, map(float, report.mean_ranks))),
               "posthoc_z": {c: (None if np.isnan(z) else float(z)) for c, z in zip(result.column_names,
                                                                                     report.posthoc_z)},
               "posthoc_p": {c: (None if np.isnan(p) else float(p)) for c, p in zip(result.column_names,
                                                                                     report.posthoc_p)}}
    else:
        report = annotate(result, args.base, args.test)
        doc = {"test": args.test, "base": result.column_names[report.base],
               "markers": {row: dict(zip(result.column_names, m)) for row, m in zip(result.row_names,
                                                                                    report.markers)},
               "summary": report.summary()}
    print(json.dumps(doc, indent=2))
    return 0


def cmd_export(args):
    data = datastore.load(args.archive)
    if args.format in ("csv", "tex"):
        if not args.output:
            raise ConfigurationError("--output is required for table exports")
        result = _metric(data, args.metric)
        report = annotate(result, args.base, args.test) if args.base is not None else None
        export_table(result, args.output, report, args.format, args.show)
        print(f"wrote {args.output}")
    elif args.format == "ioh":
        files = export_ioh(data, args.output or "ioh")
        print(f"wrote {len(files)} files to {args.output or 'ioh'}")
    elif args.format == "best-dec":
        out = export_best_dec(data, args.output or "best_dec.json")
        print(f"wrote {out}")
    return 0


def cmd_merge(args):
    archives = [datastore.load(p) for p in args.archives]
    merged = datastore.merge(archives, args.axis)
    datastore.save(merged, args.output)
    print(f"wrote {args.output} ({merged.P} x {merged.A} x {merged.reps})")
    return 0


def _parse_groups(text):
    groups = []
    for part in text.split(";"):
        items = [s.strip() for s in part.split(",") if s.strip()]
        groups.append([int(s) if s.isdigit() else s for s in items])
    return groups


def cmd_split(args):
    data = datastore.load(args.archive)
    selector = args.at if args.at is not None else (_parse_groups(args.groups) if args.groups else None)
    parts = datastore.split(data, args.axis, selector)
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, part in enumerate(parts, start=1):
        path = out_dir / f"part{i}.mtodata.json.gz"
        datastore.save(part, path)
        print(f"wrote {path} ({part.P} x {part.A} x {part.reps})")
    return 0


def cmd_precision(args):
    data = datastore.load(args.archive)
    datastore.save(datastore.set_precision(data, args.decimals), args.output or args.archive)
    return 0


def cmd_plot(args):
    from . import plotting

    if args.kind == "landscape":
        problems = resolve_problems(args.problem, args.suite_seed)
        plotting.plot_landscape(problems[0], args.output, args.task - 1, args.mode, args.resolution)
    else:
        if not args.archive:
            raise ConfigurationError(f"plot {args.kind} needs an archive")
        data = datastore.load(args.archive)
        if args.kind == "convergence":
            plotting.plot_convergence(_metric(data, args.metric), args.output, args.rows, args.algorithms,
                                      not args.linear, not args.no_ci)
        else:
            problem = args.problem or data.problem_names[0]
            plotting.plot_pareto(data, args.output, problem, args.task - 1, args.algorithms)
    print(f"wrote {args.output}")
    return 0


def cmd_list(args):
    if args.what == "algorithms":
        names = list(ALGORITHMS)
    elif args.what == "metrics":
        names = list(METRICS)
    elif args.what == "suites":
        names = list(SUITES)
    else:
        names = [f"{p.name}\t{sid}" for sid in SUITES for p in build_suite(sid)]
    print("\n".join(names))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mtobench", description="Evolutionary multitask benchmarking.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("run", help="run an experiment from a TOML config")
    p.add_argument("config")
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int, help="base seed (rep r uses seed + r - 1)")
    p.add_argument("--workers", type=int)
    p.add_argument("--G", type=int, help="number of convergence checkpoints")
    p.add_argument("--serial", action="store_true")
    p.add_argument("--save-dec", action="store_true")
    p.add_argument("--output", "-o")
    p.add_argument("--verbose", "-v", action="store_true")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("metric", help="compute a metric and cache it in the archive")
    p.add_argument("archive")
    p.add_argument("--name", required=True)
    p.add_argument("--output", "-o", help="write the updated archive here instead of in place")
    p.add_argument("--no-save", action="store_true")
    p.set_defaults(fn=cmd_metric)

    p = sub.add_parser("stats", help="significance tests on a metric")
    p.add_argument("archive")
    p.add_argument("--metric", default="obj")
    p.add_argument("--test", choices=("ranksum", "signrank", "friedman"), default="ranksum")
    p.add_argument("--base", default=0, help="base algorithm name or index")
    p.add_argument("--mode", choices=("mean", "all-reps"), default="mean")
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("export", help="export tables, IOH CSVs or best decision vectors")
    p.add_argument("archive")
    p.add_argument("--format", choices=("csv", "tex", "ioh", "best-dec"), required=True)
    p.add_argument("--metric", default="obj")
    p.add_argument("--show", choices=("mean_std", "median", "best"), default="mean_std")
    p.add_argument("--test", choices=("ranksum", "signrank"), default="ranksum")
    p.add_argument("--base", help="base algorithm for +/-/= markers")
    p.add_argument("--output", "-o")
    p.set_defaults(fn=cmd_export)

    p = sub.add_parser("merge", help="merge archives along an axis")
    p.add_argument("archives", nargs="+")
    p.add_argument("--axis", choices=("reps", "algorithms", "problems"), required=True)
    p.add_argument("--output", "-o", required=True)
    p.set_defaults(fn=cmd_merge)

    p = sub.add_parser("split", help="split an archive along an axis")
    p.add_argument("archive")
    p.add_argument("--axis", choices=("reps", "algorithms", "problems"), required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--at", type=int, help="split point: [:k] and [k:]")
    g.add_argument("--groups", help="groups of indices or names, e.g. '0,1;2'")
    p.add_argument("--output-dir", default=".")
    p.set_defaults(fn=cmd_split)

    p = sub.add_parser("precision", help="round objective, cv and runtime values")
    p.add_argument("archive")
    p.add_argument("--decimals", type=int, required=True)
    p.add_argument("--output", "-o")
    p.set_defaults(fn=cmd_precision)

    p = sub.add_parser("plot", help="SVG plots")
    p.add_argument("kind", choices=("convergence", "pareto", "landscape"))
    p.add_argument("archive", nargs="?")
    p.add_argument("--metric", default="obj")
    p.add_argument("--rows", nargs="*")
    p.add_argument("--algorithms", nargs="*")
    p.add_argument("--problem")
    p.add_argument("--task", type=int, default=1, help="1-based task index")
    p.add_argument("--mode", choices=("1D", "2D"), default="1D")
    p.add_argument("--resolution", type=int, default=101)
    p.add_argument("--suite-seed", type=int, default=0)
    p.add_argument("--linear", action="store_true", help="linear y axis")
    p.add_argument("--no-ci", action="store_true")
    p.add_argument("--output", "-o", required=True)
    p.set_defaults(fn=cmd_plot)

    p = sub.add_parser("list", help="list registered names")
    p.add_argument("what", choices=("algorithms", "problems", "metrics", "suites"))
    p.set_defaults(fn=cmd_list)
    return parser


def _kind(exc: Exception) -> str:
    if isinstance(exc, ConfigurationError):
        return "config"
    if isinstance(exc, ArchiveError):
        return "archive"
    if isinstance(exc, ExportError):
        return "export"
    if isinstance(exc, UnknownMetricError):
        return "metric"
    if isinstance(exc, OSError):
        return "io"
    return "value"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse has already printed usage
        return int(exc.code or 0)
    if args.command in ("stats", "export") and isinstance(args.base, str) and args.base.isdigit():
        args.base = int(args.base)
    try:
        return args.fn(args)
    except (ConfigurationError, ArchiveError, ExportError, UnknownMetricError, OSError, ValueError,
            KeyError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"error: {_kind(exc)}: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
