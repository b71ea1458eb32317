"""Benchmark problems and the suite registry.

Suites are addressed by id (``mtso-s``, ``cmt-s``, ``mtmo4``, ``sphere2``);
single problems by their generated name (e.g. ``MTSO-S4-PI-HS``).
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..core import ConfigurationError, Optimum, ProblemInstance, decode_unified
from .functions import NATIVE_BOUNDS, BaseFunction, eval_base, random_rotation
from .suites import (
    SuiteConfig,
    convex_front,
    make_cmt_pair,
    make_mtmo4_replica,
    make_mtso_suite,
    make_sphere_pair,
    mtmo4_centers,
)

SUITES = {
    "mtso-s": make_mtso_suite,
    "cmt-s": make_cmt_pair,
    "mtmo4": make_mtmo4_replica,
    "sphere2": make_sphere_pair,
}


def build_suite(suite_id: str, seed: int = 0, D=None, max_fe=None, N=None, **extra) -> list[ProblemInstance]:
    try:
        factory = SUITES[suite_id]
    except KeyError:
        raise ConfigurationError(f"unknown suite {suite_id!r}; known: {sorted(SUITES)}") from None
    return factory(SuiteConfig(suite_id, seed, D, max_fe, N, dict(extra)))


def problem_names(seed: int = 0) -> dict[str, str]:
    """Map every registered problem name to its suite id."""
    names = {}
    for suite_id in SUITES:
        for p in build_suite(suite_id, seed):
            names[p.name] = suite_id
    return names


def resolve_problems(ident: str, seed: int = 0, D=None, max_fe=None, N=None, **extra) -> list[ProblemInstance]:
    """Problems for a suite id or a single problem name."""
    if ident in SUITES:
        return build_suite(ident, seed, D, max_fe, N, **extra)
    for suite_id in SUITES:
        names = [p.name for p in build_suite(suite_id, seed)]
        if ident in names:
            return [p for p in build_suite(suite_id, seed, D, max_fe, N, **extra) if p.name == ident]
    raise ConfigurationError(f"unknown problem or suite {ident!r}")


def rebuild(source: dict) -> ProblemInstance:
    """Reconstruct a problem from its ``source`` descriptor."""
    extra = {k: v for k, v in source.items() if k not in ("suite", "name", "seed", "D", "max_fe", "N")}
    for p in build_suite(source["suite"], source.get("seed", 0), source.get("D"), source.get("max_fe"),
                         source.get("N"), **extra):
        if p.name == source["name"]:
            return p
    raise ConfigurationError(f"problem {source['name']!r} not found in suite {source['suite']!r}")


def reference_point(front) -> np.ndarray:
    """Hypervolume reference point: componentwise worst front value padded by 10%."""
    nadir = np.asarray(front, dtype=float).max(axis=0)
    pad = 0.1 * np.abs(nadir)
    return nadir + np.where(pad > 0, pad, 0.1)


def get_optimum(problem: ProblemInstance, task_index: int) -> Optimum | None:
    """The known optimum of a task: scalar value, front sample, or HV reference point."""
    return problem.optimum[task_index]


def hv_reference(problem_optimum: Optimum | None, achieved=None) -> np.ndarray | None:
    if problem_optimum is None:
        return None if achieved is None else reference_point(achieved)
    if problem_optimum.kind == "front":
        return reference_point(problem_optimum.data)
    if problem_optimum.kind == "reference":
        return problem_optimum.data
    return None


def sample_landscape(problem: ProblemInstance, task_index: int, mode: str = "1D", resolution: int = 101):
    """Objective and feasibility grids over the first one or two unified coordinates.

    Remaining unified coordinates are held at 0.5. Returns a dict with
    ``axes`` (list of coordinate vectors in [0, 1]), ``obj`` with shape
    ``(r,)``/``(r, r)`` plus a trailing objective axis when M > 1, and a
    boolean ``feasible`` grid.
    """
    task = problem.tasks[task_index]
    D = problem.unified_dim
    axis = np.linspace(0.0, 1.0, resolution)
    if mode == "1D":
        y = np.full((resolution, D), 0.5)
        y[:, 0] = axis
        shape = (resolution,)
        axes = [axis]
    elif mode == "2D":
        if D < 2:
            raise ConfigurationError("2D landscape needs a unified space of dimension >= 2")
        a, b = np.meshgrid(axis, axis, indexing="ij")
        y = np.full((resolution * resolution, D), 0.5)
        y[:, 0] = a.ravel()
        y[:, 1] = b.ravel()
        shape = (resolution, resolution)
        axes = [axis, axis]
    else:
        raise ConfigurationError("mode must be '1D' or '2D'")
    with np.errstate(all="ignore"):
        obj, con = task.objective_fn(decode_unified(y, task))
    obj = np.asarray(obj, dtype=float).reshape(len(y), task.num_objectives)
    con = np.asarray(con, dtype=float).reshape(len(y), -1)
    cv = con.sum(axis=1) if con.shape[1] else np.zeros(len(y))
    obj = obj[:, 0].reshape(shape) if task.num_objectives == 1 else obj.reshape(shape + (task.num_objectives,))
    return {"axes": axes, "obj": obj, "feasible": (cv <= 0).reshape(shape), "mode": mode,
            "evaluations": len(y)}


def write_landscape_csv(grid: dict, path) -> Path:
    """Write a landscape grid as long-format CSV (``u1[,u2],f[_k]...,feasible``)."""
    path = Path(path)
    obj = grid["obj"]
    feas = grid["feasible"]
    axes = grid["axes"]
    multi = obj.ndim > len(axes)
    n_obj = obj.shape[-1] if multi else 1
    header = [f"u{i + 1}" for i in range(len(axes))]
    header += [f"f{k + 1}" for k in range(n_obj)] if multi else ["f"]
    header.append("feasible")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for idx in np.ndindex(feas.shape):
            coords = [repr(float(axes[i][j])) for i, j in enumerate(idx)]
            vals = obj[idx]
            vals = [repr(float(v)) for v in np.atleast_1d(vals)]
            w.writerow(coords + vals + [int(bool(feas[idx]))])
    return path


__all__ = [
    "NATIVE_BOUNDS", "BaseFunction", "eval_base", "random_rotation", "SuiteConfig", "SUITES",
    "build_suite", "resolve_problems", "rebuild", "problem_names", "get_optimum", "reference_point",
    "hv_reference", "sample_landscape", "write_landscape_csv", "make_mtso_suite", "make_cmt_pair",
    "make_mtmo4_replica", "make_sphere_pair", "mtmo4_centers", "convex_front",
]
