"""Experiment orchestration: configs, deterministic (parallel) execution, metric caching.

Every (problem, algorithm, rep) run is described by a small picklable record
and rebuilt inside the worker from registry names, so runs share no state.
Results are placed by index, never by completion order, and rep ``r``
(1-based) of every cell is seeded with ``base_seed + r - 1``.
"""

from __future__ import annotations

import os
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .algorithms import make_algorithm
from .core import ConfigurationError, ProblemInstance
from .datastore import ExperimentData, zero_run_times
from .metrics import METRICS, compute_metric
from .problems import rebuild, resolve_problems

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

WORKERS_ENV = "MTOP_WORKERS"
_PROBLEM_KEYS = ("id", "seed", "D", "max_fe", "N")


@dataclass
class AlgorithmEntry:
    name: str
    params: dict = field(default_factory=dict)
    # column label; defaults to the registry name
    label: str | None = None

    @property
    def display(self) -> str:
        return self.label or self.name


@dataclass
class ProblemEntry:
    id: str
    seed: int = 0
    D: int | None = None
    max_fe: int | None = None
    N: int | None = None
    extra: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    algorithms: list
    problems: list
    reps: int = 30
    base_seed: int = 1
    G: int = 50
    save_dec: bool = False
    parallel: bool = True
    workers: int | None = None
    output: str | None = None

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        exp = dict(doc.get("experiment", {}))
        known = {"reps", "base_seed", "G", "save_dec", "parallel", "workers", "output"}
        unknown = set(exp) - known
        if unknown:
            raise ConfigurationError(f"unknown [experiment] key(s) {sorted(unknown)}")
        algorithms = []
        for a in doc.get("algorithms", []):
            a = dict(a)
            if "name" not in a:
                raise ConfigurationError("every [[algorithms]] entry needs a name")
            bad = set(a) - {"name", "params", "label"}
            if bad:
                raise ConfigurationError(f"unknown [[algorithms]] key(s) {sorted(bad)}")
            algorithms.append(AlgorithmEntry(a["name"], dict(a.get("params", {})), a.get("label")))
        problems = []
        for p in doc.get("problems", []):
            p = dict(p)
            if "id" not in p:
                raise ConfigurationError("every [[problems]] entry needs an id")
            extra = {k: v for k, v in p.items() if k not in _PROBLEM_KEYS}
            problems.append(ProblemEntry(p["id"], int(p.get("seed", 0)), p.get("D"), p.get("max_fe"),
                                         p.get("N"), extra))
        return cls(algorithms, problems, **exp)

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        """Copy with non-``None`` overrides applied (CLI flags win over the file)."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def load_config(path, **overrides) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"invalid TOML in {path}: {exc}") from exc
    return ExperimentConfig.from_dict(doc).with_overrides(**overrides)


@dataclass(frozen=True)
class RunDescriptor:
    index: tuple
    source: dict
    algorithm: str
    params: dict
    seed: int
    G: int
    save_dec: bool


def execute(desc: RunDescriptor):
    """Run one descriptor; returns ``(index, result, error)`` and never raises."""
    try:
        problem = rebuild(desc.source)
        algorithm = make_algorithm(desc.algorithm, **desc.params)
        return desc.index, algorithm.run(problem, desc.seed, desc.G, desc.save_dec), None
    except Exception as exc:  # a failed cell must not abort the experiment
        return desc.index, None, f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=5)}"


def worker_count(config: ExperimentConfig) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigurationError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    else:
        n = config.workers or os.cpu_count() or 1
    return max(1, n)


def _resolve(config: ExperimentConfig) -> tuple[list, list[ProblemInstance]]:
    if config.reps < 1:
        raise ConfigurationError("reps must be >= 1")
    if config.G < 1:
        raise ConfigurationError("G must be >= 1")
    if not config.algorithms or not config.problems:
        raise ConfigurationError("an experiment needs at least one algorithm and one problem")
    algorithms = [(entry, make_algorithm(entry.name, **entry.params)) for entry in config.algorithms]
    labels = [e.display for e, _ in algorithms]
    if len(set(labels)) != len(labels):
        raise ConfigurationError(f"duplicate algorithm labels {labels}; set distinct 'label' values")
    problems = []
    for entry in config.problems:
        problems += resolve_problems(entry.id, entry.seed, entry.D, entry.max_fe, entry.N, **entry.extra)
    names = [p.name for p in problems]
    if len(set(names)) != len(names):
        raise ConfigurationError(f"duplicate problems {names}")
    for problem in problems:
        for _, alg in algorithms:
            alg.check_compatible(problem)
    return algorithms, problems


def problem_record(problem: ProblemInstance) -> dict:
    rec = problem.metadata()
    rec["optimum"] = list(problem.optimum)
    rec["source"] = dict(problem.source)
    return rec


def run_experiment(config: ExperimentConfig, seed_hook=None, progress=None) -> ExperimentData:
    """Execute all ``P x A x R`` runs and assemble the archive.

    ``seed_hook(problem, algorithm, rep, seed)`` is called for every finished
    run with the seed the run actually used (``rep`` is 1-based).
    Configuration problems raise :class:`ConfigurationError` before anything
    runs; a failing run becomes a ``None`` cell listed in ``failures``.
    """
    algorithms, problems = _resolve(config)
    P, A, R = len(problems), len(algorithms), config.reps
    descriptors = [
        RunDescriptor((p, a, r), dict(problem.source), entry.name, alg.get_parameter(),
                      config.base_seed + r, config.G, config.save_dec)
        for p, problem in enumerate(problems)
        for a, (entry, alg) in enumerate(algorithms)
        for r in range(R)
    ]
    results = [[[None] * R for _ in range(A)] for _ in range(P)]
    run_times = np.zeros((P, A, R))
    failures = []
    workers = worker_count(config) if config.parallel else 1
    if workers > 1 and len(descriptors) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(descriptors))) as pool:
            outcomes = pool.map(execute, descriptors)
            _collect(outcomes, problems, algorithms, results, run_times, failures, seed_hook, progress)
    else:
        _collect(map(execute, descriptors), problems, algorithms, results, run_times, failures,
                 seed_hook, progress)
    alg_meta = [{"name": entry.display, "algorithm": entry.name, "params": alg.get_parameter()}
                for entry, alg in algorithms]
    return ExperimentData(alg_meta, [problem_record(p) for p in problems], results, run_times, R,
                          config.G, config.save_dec, config.base_seed,
                          [config.base_seed + r for r in range(R)], {}, failures)


def _collect(outcomes, problems, algorithms, results, run_times, failures, seed_hook, progress):
    for (p, a, r), result, error in outcomes:
        if result is None:
            run_times[p, a, r] = np.nan
            failures.append({"problem": problems[p].name, "algorithm": algorithms[a][0].display,
                             "rep": r, "error": error})
        else:
            results[p][a][r] = result
            run_times[p, a, r] = result.wall_time
            if seed_hook is not None:
                seed_hook(problems[p].name, algorithms[a][0].display, r + 1, result.seed)
        if progress is not None:
            progress(p, a, r, error)


def default_output(config: ExperimentConfig, config_path: str | None = None) -> Path:
    if config.output:
        return Path(config.output)
    stem = Path(config_path).stem if config_path else "experiment"
    return Path(f"{stem}.mtodata.json.gz")
