"""The experiment archive and its algebra: save/load, merge, split, precision.

An archive is a single JSON document (optionally gzip-compressed). Numeric
arrays are stored as ``{"shape", "dtype", "data"}`` with row-major flattened
data; non-finite floats are written as the strings ``"inf"``, ``"-inf"`` and
``"nan"``. Floats use Python's shortest round-trip representation, so
loading reproduces every value bit for bit. A SHA-256 checksum over the
canonical document catches corruption and truncation. Keys this version does
not know are kept in :attr:`ExperimentData.extra` and written back unchanged.

``seeds`` lists the seed of every repetition, so archives produced with
different base seeds can be merged without losing provenance; ``base_seed``
is the seed of the first repetition.
"""

from __future__ import annotations

import copy
import gzip
import hashlib
import io
import json
import math
import zlib
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np

from .core import Optimum, RunResult
from .metrics import MetricResult

FORMAT = "mtodata"
SCHEMA_VERSION = "1.0"

_KNOWN = {"format", "schema_version", "checksum", "reps", "G", "save_dec", "base_seed", "seeds",
          "algorithms", "problems", "results", "run_times", "metrics", "failures"}


class ArchiveError(Exception):
    """Base class for archive problems."""


class SchemaVersionError(ArchiveError):
    """The file is not an archive of a version this library can read."""


class IntegrityError(ArchiveError):
    """The file is truncated, corrupted or fails its checksum."""


class MergeCompatibilityError(ArchiveError):
    """Two archives differ in a setting that must match for the merge."""

    def __init__(self, field_name: str, detail: str = ""):
        self.field = field_name
        super().__init__(f"archives differ in {field_name!r}" + (f": {detail}" if detail else ""))


class MergeConflictError(ArchiveError):
    """A merge would produce duplicate algorithm or problem names."""


# --- array codec -------------------------------------------------------------

def _float_token(v: float):
    if math.isfinite(v):
        return v
    if math.isnan(v):
        return "nan"
    return "inf" if v > 0 else "-inf"


def _float_value(v) -> float:
    return float(v) if isinstance(v, str) else v


def encode_array(a) -> dict:
    a = np.asarray(a)
    if a.dtype.kind in "iub":
        return {"shape": list(a.shape), "dtype": "int64", "data": [int(v) for v in a.ravel()]}
    a = a.astype(float, copy=False)
    return {"shape": list(a.shape), "dtype": "float64", "data": [_float_token(float(v)) for v in a.ravel()]}


def decode_array(d: dict) -> np.ndarray:
    if d["dtype"] == "int64":
        return np.array(d["data"], dtype=np.int64).reshape(d["shape"])
    if d["dtype"] != "float64":
        raise SchemaVersionError(f"unsupported array dtype {d['dtype']!r}")
    return np.array([_float_value(v) for v in d["data"]], dtype=float).reshape(d["shape"])


def _enc_opt(o):
    return None if o is None else {"kind": o.kind, "data": encode_array(o.data)}


def _dec_opt(d):
    return None if d is None else Optimum(d["kind"], decode_array(d["data"]))


def encode_result(res: RunResult | None):
    if res is None:
        return None
    return {
        "obj": [encode_array(a) for a in res.obj],
        "cv": [encode_array(a) for a in res.cv],
        "dec": None if res.dec is None else [encode_array(a) for a in res.dec],
        "fe": encode_array(np.asarray(res.fe, dtype=np.int64)),
        "wall_time": _float_token(float(res.wall_time)),
        "seed": int(res.seed),
        "nan_count": int(res.nan_count),
        "multiobjective": bool(res.multiobjective),
    }


def decode_result(d) -> RunResult | None:
    if d is None:
        return None
    return RunResult(
        [decode_array(a) for a in d["obj"]],
        [decode_array(a) for a in d["cv"]],
        None if d["dec"] is None else [decode_array(a) for a in d["dec"]],
        decode_array(d["fe"]),
        _float_value(d["wall_time"]),
        d["seed"],
        d["nan_count"],
        d["multiobjective"],
    )


def encode_metric(m: MetricResult) -> dict:
    pareto = None
    if m.pareto is not None:
        pareto = [[[None if s is None else encode_array(s) for s in cell] for cell in row] for row in m.pareto]
    return {
        "name": m.name,
        "orientation": m.orientation,
        "row_names": list(m.row_names),
        "column_names": list(m.column_names),
        "table": encode_array(m.table),
        "converge": None if m.converge is None else encode_array(m.converge),
        "converge_fe": None if m.converge_fe is None else encode_array(m.converge_fe),
        "pareto": pareto,
    }


def decode_metric(d: dict) -> MetricResult:
    pareto = None
    if d.get("pareto") is not None:
        pareto = [[[None if s is None else decode_array(s) for s in cell] for cell in row] for row in d["pareto"]]
    return MetricResult(
        d["name"], d["orientation"], list(d["row_names"]), list(d["column_names"]),
        decode_array(d["table"]),
        None if d.get("converge") is None else decode_array(d["converge"]),
        None if d.get("converge_fe") is None else decode_array(d["converge_fe"]),
        pareto,
    )


def _enc_problem(p: dict) -> dict:
    out = {k: v for k, v in p.items() if k != "optimum"}
    out["optimum"] = [_enc_opt(o) for o in p.get("optimum", [None] * p["T"])]
    return out


def _dec_problem(d: dict) -> dict:
    out = dict(d)
    out["optimum"] = [_dec_opt(o) for o in d["optimum"]]
    return out


# --- archive -----------------------------------------------------------------

@dataclass(eq=False)
class ExperimentData:
    """A ``P x A x R`` experiment: metadata, run records, run times, cached metrics.

    ``problems`` entries are dicts with ``name``, ``T``, ``M``, ``D``,
    ``max_fe``, ``N``, ``optimum`` (per task :class:`~mtobench.core.Optimum`
    or ``None``) and ``source`` (the registry descriptor). ``results[p][a][r]``
    is a :class:`~mtobench.core.RunResult`, or ``None`` for a failed run whose
    diagnostics are in ``failures``.
    """

    algorithms: list
    problems: list
    results: list
    run_times: np.ndarray
    reps: int
    G: int = 50
    save_dec: bool = False
    base_seed: int = 0
    seeds: list | None = None
    metrics: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def __post_init__(self):
        if self.seeds is None:
            self.seeds = [self.base_seed + r for r in range(self.reps)]
        self.seeds = [int(s) for s in self.seeds]
        self.run_times = np.asarray(self.run_times, dtype=float).reshape(self.P, self.A, self.reps)
        # canonical order keeps split/merge round trips exact
        pos_p = {n: i for i, n in enumerate(self.problem_names)}
        pos_a = {n: i for i, n in enumerate(self.algorithm_names)}
        self.failures = sorted(self.failures, key=lambda f: (pos_p.get(f.get("problem"), -1),
                                                             pos_a.get(f.get("algorithm"), -1), f.get("rep", 0)))
        self.validate()

    @property
    def P(self) -> int:
        return len(self.problems)

    @property
    def A(self) -> int:
        return len(self.algorithms)

    @property
    def algorithm_names(self) -> list[str]:
        return [a["name"] for a in self.algorithms]

    @property
    def problem_names(self) -> list[str]:
        return [p["name"] for p in self.problems]

    def validate(self) -> None:
        if self.reps < 0:
            raise ArchiveError("reps must be non-negative")
        if len(self.seeds) != self.reps:
            raise ArchiveError("one seed per repetition is required")
        if len(self.results) != self.P or any(len(row) != self.A for row in self.results):
            raise ArchiveError("results must be P x A x R")
        for p, row in enumerate(self.results):
            for cells in row:
                if len(cells) != self.reps:
                    raise ArchiveError("results must be P x A x R")
                for res in cells:
                    if res is None:
                        continue
                    if res.T != self.problems[p]["T"]:
                        raise ArchiveError(f"result task count does not match problem {self.problems[p]['name']!r}")
                    if res.G != self.G:
                        raise ArchiveError("result length does not match the archive's G")

    def to_dict(self) -> dict:
        doc = dict(self.extra)
        doc.update({
            "format": FORMAT,
            "schema_version": self.schema_version,
            "reps": self.reps,
            "G": self.G,
            "save_dec": bool(self.save_dec),
            "base_seed": int(self.base_seed),
            "seeds": list(self.seeds),
            "algorithms": copy.deepcopy(self.algorithms),
            "problems": [_enc_problem(p) for p in self.problems],
            "results": [[[encode_result(r) for r in cells] for cells in row] for row in self.results],
            "run_times": encode_array(self.run_times),
            "metrics": {k: encode_metric(v) for k, v in self.metrics.items()},
            "failures": copy.deepcopy(self.failures),
        })
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentData":
        if doc.get("format") != FORMAT:
            raise SchemaVersionError("not an mtodata archive")
        version = str(doc.get("schema_version", ""))
        if version.split(".")[0] != SCHEMA_VERSION.split(".")[0]:
            raise SchemaVersionError(f"archive schema version {version!r} is not readable "
                                     f"(supported: {SCHEMA_VERSION})")
        try:
            return cls(
                algorithms=copy.deepcopy(doc["algorithms"]),
                problems=[_dec_problem(p) for p in doc["problems"]],
                results=[[[decode_result(r) for r in cells] for cells in row] for row in doc["results"]],
                run_times=decode_array(doc["run_times"]),
                reps=doc["reps"],
                G=doc["G"],
                save_dec=doc["save_dec"],
                base_seed=doc["base_seed"],
                seeds=doc["seeds"],
                metrics={k: decode_metric(v) for k, v in doc.get("metrics", {}).items()},
                failures=copy.deepcopy(doc.get("failures", [])),
                extra={k: copy.deepcopy(v) for k, v in doc.items() if k not in _KNOWN},
                schema_version=version,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise IntegrityError(f"malformed archive: {exc}") from exc

    def __eq__(self, other):
        if not isinstance(other, ExperimentData):
            return NotImplemented
        return canonical_json(self.to_dict()) == canonical_json(other.to_dict())

    __hash__ = None

    def copy(self) -> "ExperimentData":
        return ExperimentData.from_dict(self.to_dict())


def canonical_json(doc: dict) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False).encode()


def _checksum(doc: dict) -> str:
    body = {k: v for k, v in doc.items() if k != "checksum"}
    return "sha256:" + hashlib.sha256(canonical_json(body)).hexdigest()


def dumps(data: ExperimentData) -> bytes:
    doc = data.to_dict()
    doc["checksum"] = _checksum(doc)
    return canonical_json(doc)


def loads(raw: bytes) -> ExperimentData:
    if raw[:2] == b"\x1f\x8b":
        try:
            raw = gzip.decompress(raw)
        except (OSError, EOFError, zlib.error) as exc:
            raise IntegrityError(f"compressed archive is truncated or corrupted: {exc}") from exc
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise IntegrityError(f"archive is truncated or not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise IntegrityError("archive root must be a JSON object")
    if doc.get("format") != FORMAT:
        raise SchemaVersionError("not an mtodata archive")
    stored = doc.get("checksum")
    if stored is None or stored != _checksum(doc):
        raise IntegrityError("archive checksum mismatch")
    return ExperimentData.from_dict(doc)


def save(data: ExperimentData, path, compress: bool | None = None) -> Path:
    """Write an archive; gzip is used when ``compress`` or the name ends in ``.gz``.

    Output is byte-deterministic: keys are sorted and the gzip header carries
    no timestamp or file name.
    """
    path = Path(path)
    raw = dumps(data)
    if compress or (compress is None and path.suffix == ".gz"):
        buf = io.BytesIO()
        with gzip.GzipFile(filename="", mode="wb", fileobj=buf, mtime=0) as gz:
            gz.write(raw)
        raw = buf.getvalue()
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(raw)
    tmp.replace(path)
    return path


def load(path) -> ExperimentData:
    return loads(Path(path).read_bytes())


def empty_archive(algorithms=(), problems=(), G: int = 50, save_dec: bool = False,
                  base_seed: int = 0) -> ExperimentData:
    algorithms = [copy.deepcopy(a) for a in algorithms]
    problems = [dict(p) for p in problems]
    results = [[[] for _ in algorithms] for _ in problems]
    return ExperimentData(algorithms, problems, results, np.zeros((len(problems), len(algorithms), 0)),
                          0, G, save_dec, base_seed, [])


def zero_run_times(data: ExperimentData) -> ExperimentData:
    """Copy with every recorded wall time set to zero (for reproducibility checks)."""
    out = data.copy()
    out.run_times[:] = 0.0
    for row in out.results:
        for cells in row:
            for res in cells:
                if res is not None:
                    res.wall_time = 0.0
    if "runtime" in out.metrics:
        del out.metrics["runtime"]
    return out


# --- merge -------------------------------------------------------------------

def _problem_key(p: dict) -> bytes:
    return canonical_json(_enc_problem(p))


def _is_empty(d: ExperimentData) -> bool:
    return d.reps == 0 or d.P == 0 or d.A == 0


def _check_same(a: ExperimentData, b: ExperimentData, fields: tuple[str, ...]) -> None:
    for name in fields:
        if name == "algorithms":
            if canonical_json({"v": a.algorithms}) != canonical_json({"v": b.algorithms}):
                raise MergeCompatibilityError("algorithms", f"{a.algorithm_names} vs {b.algorithm_names}")
        elif name == "problems":
            if [_problem_key(p) for p in a.problems] != [_problem_key(p) for p in b.problems]:
                raise MergeCompatibilityError("problems", f"{a.problem_names} vs {b.problem_names}")
        elif getattr(a, name) != getattr(b, name):
            raise MergeCompatibilityError(name, f"{getattr(a, name)!r} vs {getattr(b, name)!r}")


def _shift_failures(failures, rep_offset=0):
    out = []
    for f in failures:
        f = dict(f)
        f["rep"] = f["rep"] + rep_offset
        out.append(f)
    return out


def merge_reps(a: ExperimentData, b: ExperimentData) -> ExperimentData:
    """Concatenate repetitions of two archives with identical settings."""
    if _is_empty(b):
        return a.copy()
    if _is_empty(a):
        return b.copy()
    _check_same(a, b, ("algorithms", "problems", "G", "save_dec"))
    a, b = a.copy(), b.copy()
    results = [[a.results[p][k] + b.results[p][k] for k in range(a.A)] for p in range(a.P)]
    return ExperimentData(
        a.algorithms, a.problems, results, np.concatenate([a.run_times, b.run_times], axis=2),
        a.reps + b.reps, a.G, a.save_dec, a.base_seed, a.seeds + b.seeds, {},
        a.failures + _shift_failures(b.failures, a.reps), a.extra,
    )


def merge_algorithms(a: ExperimentData, b: ExperimentData) -> ExperimentData:
    """Columns of ``b`` appended after those of ``a``; problems and reps must match."""
    if b.A == 0:
        return a.copy()
    if a.A == 0:
        return b.copy()
    _check_same(a, b, ("problems", "reps", "seeds", "G", "save_dec"))
    dup = sorted(set(a.algorithm_names) & set(b.algorithm_names))
    if dup:
        raise MergeConflictError(f"duplicate algorithm name(s): {dup}")
    a, b = a.copy(), b.copy()
    results = [a.results[p] + b.results[p] for p in range(a.P)]
    return ExperimentData(
        a.algorithms + b.algorithms, a.problems, results, np.concatenate([a.run_times, b.run_times], axis=1),
        a.reps, a.G, a.save_dec, a.base_seed, a.seeds, {}, a.failures + b.failures, a.extra,
    )


def merge_problems(a: ExperimentData, b: ExperimentData) -> ExperimentData:
    """Rows of ``b`` appended after those of ``a``; algorithms and reps must match."""
    if b.P == 0:
        return a.copy()
    if a.P == 0:
        return b.copy()
    _check_same(a, b, ("algorithms", "reps", "seeds", "G", "save_dec"))
    dup = sorted(set(a.problem_names) & set(b.problem_names))
    if dup:
        raise MergeConflictError(f"duplicate problem name(s): {dup}")
    a, b = a.copy(), b.copy()
    return ExperimentData(
        a.algorithms, a.problems + b.problems, a.results + b.results,
        np.concatenate([a.run_times, b.run_times], axis=0),
        a.reps, a.G, a.save_dec, a.base_seed, a.seeds, {}, a.failures + b.failures, a.extra,
    )


MERGERS = {"reps": merge_reps, "algorithms": merge_algorithms, "problems": merge_problems}


def merge(archives, axis: str) -> ExperimentData:
    """Fold :func:`merge_reps` / ``merge_algorithms`` / ``merge_problems`` over a list."""
    try:
        fn = MERGERS[axis]
    except KeyError:
        raise ValueError(f"axis must be one of {sorted(MERGERS)}") from None
    archives = list(archives)
    if not archives:
        raise ValueError("nothing to merge")
    out = archives[0].copy()
    for other in archives[1:]:
        out = fn(out, other)
    return out


# --- split -------------------------------------------------------------------

def _resolve(selector_group, names, axis):
    idx = []
    for s in selector_group:
        if isinstance(s, str):
            if s not in names:
                raise ValueError(f"unknown {axis} entry {s!r}")
            idx.append(names.index(s))
        else:
            i = int(s)
            if not 0 <= i < len(names):
                raise ValueError(f"{axis} index {i} out of range")
            idx.append(i)
    return idx


def _groups(data, axis, selector):
    n = {"reps": data.reps, "algorithms": data.A, "problems": data.P}[axis]
    names = {"reps": [str(r) for r in range(data.reps)], "algorithms": data.algorithm_names,
             "problems": data.problem_names}[axis]
    if selector is None:
        return [[i] for i in range(n)]
    if isinstance(selector, int):
        if not 0 <= selector <= n:
            raise ValueError(f"split point {selector} out of range")
        return [list(range(selector)), list(range(selector, n))]
    return [_resolve(g if isinstance(g, (list, tuple, range)) else [g], names, axis) for g in selector]


def subset(data: ExperimentData, problems=None, algorithms=None, reps=None) -> ExperimentData:
    """Self-contained archive restricted to the given index lists (``None`` keeps all)."""
    src = data.copy()
    P = list(range(src.P)) if problems is None else list(problems)
    A = list(range(src.A)) if algorithms is None else list(algorithms)
    R = list(range(src.reps)) if reps is None else list(reps)
    results = [[[src.results[p][a][r] for r in R] for a in A] for p in P]
    run_times = src.run_times[np.ix_(P, A, R)] if P and A and R else np.zeros((len(P), len(A), len(R)))
    seeds = [src.seeds[r] for r in R]
    pnames = {src.problem_names[p] for p in P}
    anames = {src.algorithm_names[a] for a in A}
    rmap = {r: i for i, r in enumerate(R)}
    failures = []
    for f in src.failures:
        if f["problem"] in pnames and f["algorithm"] in anames and f["rep"] in rmap:
            f = dict(f)
            f["rep"] = rmap[f["rep"]]
            failures.append(f)
    return ExperimentData(
        [src.algorithms[a] for a in A], [src.problems[p] for p in P], results, run_times, len(R),
        src.G, src.save_dec, seeds[0] if seeds else src.base_seed, seeds, {}, failures, src.extra,
    )


def split(data: ExperimentData, axis: str, selector=None) -> list[ExperimentData]:
    """Partition an archive along ``reps``, ``algorithms`` or ``problems``.

    ``selector`` is ``None`` (one archive per entry), an ``int`` split point
    (two archives, ``[:k]`` and ``[k:]``), or a list of groups, each a list of
    indices or names. Cached metrics are dropped from the outputs.
    """
    if axis not in MERGERS:
        raise ValueError(f"axis must be one of {sorted(MERGERS)}")
    out = []
    for group in _groups(data, axis, selector):
        out.append(subset(data, **{axis: group}))
    return out


# --- precision ---------------------------------------------------------------

def _round_half_away(x: float, decimals: int) -> float:
    if not math.isfinite(x):
        return x
    q = Decimal(1).scaleb(-decimals)
    return float(Decimal(repr(x)).quantize(q, rounding=ROUND_HALF_UP))


def round_array(a, decimals: int) -> np.ndarray:
    """Round half away from zero on the decimal representation of each value."""
    a = np.asarray(a, dtype=float)
    flat = [_round_half_away(float(v), decimals) for v in a.ravel()]
    return np.array(flat, dtype=float).reshape(a.shape)


def set_precision(data: ExperimentData, decimals: int) -> ExperimentData:
    """Copy with objectives, constraint violations and run times rounded to ``decimals`` places.

    Decision vectors, evaluation counts and seeds are untouched; cached
    metrics are dropped because they would no longer match.
    """
    if decimals < 0:
        raise ValueError("decimals must be non-negative")
    out = data.copy()
    out.run_times = round_array(out.run_times, decimals)
    for row in out.results:
        for cells in row:
            for res in cells:
                if res is None:
                    continue
                res.obj = [round_array(a, decimals) for a in res.obj]
                res.cv = [round_array(a, decimals) for a in res.cv]
                res.wall_time = _round_half_away(float(res.wall_time), decimals)
    out.metrics = {}
    return out
