"""Synthetic multitask suites generated deterministically from ``(suite_id, seed)``.

These are structural stand-ins for the usual competition suites: same task
pairings and optimum-overlap categories, seeded shifts and rotations instead
of the official data files. They are not numerically equivalent.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from ..core import ConfigurationError, Optimum, ProblemInstance, TaskSpec
from .functions import NATIVE_BOUNDS, BaseFunction, random_rotation

FRONT_SAMPLES = 1000


@dataclass(frozen=True)
class SuiteConfig:
    suite_id: str
    seed: int = 0
    D: int | None = None
    max_fe: int | None = None
    N: int | None = None
    extra: dict = field(default_factory=dict)


def _suite_rng(suite_id: str, seed: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed), zlib.crc32(suite_id.encode()), int(index)])
    return np.random.Generator(np.random.PCG64(ss))


def _single_objective_task(fn: BaseFunction, name: str) -> TaskSpec:
    lo, hi = fn.bounds

    def objective(x, fn=fn):
        return fn(x)[:, None], np.zeros((x.shape[0], 0))

    return TaskSpec(fn.dim, np.full(fn.dim, lo), np.full(fn.dim, hi), 1, objective, 0, name)


def _shift_from_unified(kind: str, u: np.ndarray) -> np.ndarray:
    lo, hi = NATIVE_BOUNDS[kind]
    return lo + u * (hi - lo)


# (name, task-1 kind, rotated, task-2 kind, rotated, overlap)
MTSO_PAIRS = [
    ("CI-HS", "griewank", True, "rastrigin", True, "complete"),
    ("CI-MS", "ackley", True, "rastrigin", True, "complete"),
    ("CI-LS", "ackley", True, "schwefel", False, "complete"),
    ("PI-HS", "rastrigin", True, "sphere", False, "partial"),
    ("PI-MS", "ackley", True, "rosenbrock", False, "partial"),
    ("PI-LS", "ackley", True, "weierstrass", True, "partial"),
    ("NI-HS", "rosenbrock", False, "rastrigin", True, "none"),
    ("NI-MS", "griewank", True, "weierstrass", True, "none"),
    ("NI-LS", "rastrigin", True, "schwefel", False, "none"),
]


def _optimum_pair(rng, dim, overlap):
    u1 = rng.uniform(0.2, 0.8, dim)
    u2 = rng.uniform(0.2, 0.8, dim)
    if overlap == "complete":
        u2 = u1.copy()
    elif overlap == "partial":
        half = dim // 2
        u2[:half] = u1[:half]
    elif overlap != "none":
        raise ConfigurationError(f"unknown overlap {overlap!r}")
    return u1, u2


def make_mtso_suite(config: SuiteConfig) -> list[ProblemInstance]:
    """Nine two-task single-objective problems (complete/partial/no optimum intersection)."""
    dim = config.D or 50
    max_fe = config.max_fe or 100_000
    n = config.N or 100
    problems = []
    for index, (label, k1, rot1, k2, rot2, overlap) in enumerate(MTSO_PAIRS, start=1):
        rng = _suite_rng(config.suite_id, config.seed, index)
        u1, u2 = _optimum_pair(rng, dim, overlap)
        f1 = BaseFunction(k1, _shift_from_unified(k1, u1), random_rotation(dim, rng) if rot1 else None)
        f2 = BaseFunction(k2, _shift_from_unified(k2, u2), random_rotation(dim, rng) if rot2 else None)
        name = f"MTSO-S{index}-{label}"
        problems.append(ProblemInstance(
            name,
            (_single_objective_task(f1, f"{name}-T1"), _single_objective_task(f2, f"{name}-T2")),
            n, max_fe,
            (Optimum("value", 0.0), Optimum("value", 0.0)),
            {"suite": config.suite_id, "name": name, "seed": config.seed,
             "D": config.D, "max_fe": config.max_fe, "N": config.N, **config.extra},
        ))
    return problems


def make_sphere_pair(config: SuiteConfig) -> list[ProblemInstance]:
    """Two shifted spheres; the convergence sanity problem.

    By default both tasks share one optimum (identical landscapes), with
    ``N = 50`` per task; ``extra["overlap"]`` may be ``"partial"`` or ``"none"``.
    """
    dim = config.D or 10
    max_fe = config.max_fe or 20_000
    n = config.N or 50
    rng = _suite_rng(config.suite_id, config.seed, 1)
    overlap = config.extra.get("overlap", "complete")
    u1, u2 = _optimum_pair(rng, dim, overlap)
    name = "SPHERE2"
    tasks = tuple(
        _single_objective_task(BaseFunction("sphere", _shift_from_unified("sphere", u)), f"{name}-T{t}")
        for t, u in enumerate((u1, u2), start=1)
    )
    return [ProblemInstance(name, tasks, n, max_fe, (Optimum("value", 0.0),) * 2,
                            {"suite": config.suite_id, "name": name, "seed": config.seed,
                             "D": config.D, "max_fe": config.max_fe, "N": config.N, **config.extra})]


@dataclass(frozen=True, eq=False)
class ConstrainedSphere:
    """Shifted sphere subject to a half-space and a sphere-exclusion constraint.

    ``g1(x) = w . (x - shift) <= 0`` and ``g2(x) = r^2 - |x - center|^2 <= 0``;
    returned constraint values are the positive parts (violation amounts).
    """

    shift: np.ndarray
    normal: np.ndarray
    center: np.ndarray
    radius: float

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        z = x - self.shift
        obj = np.sum(z * z, axis=1)
        g1 = z @ self.normal
        dc = x - self.center
        g2 = self.radius ** 2 - np.sum(dc * dc, axis=1)
        con = np.maximum(np.column_stack([g1, g2]), 0.0)
        return obj[:, None], con


def make_cmt_pair(config: SuiteConfig) -> list[ProblemInstance]:
    """Two-task constrained problem with an optimum on the half-space boundary."""
    dim = config.D or 50
    max_fe = config.max_fe or 100_000
    n = config.N or 100
    rng = _suite_rng(config.suite_id, config.seed, 1)
    u1, u2 = _optimum_pair(rng, dim, "partial")
    lo, hi = NATIVE_BOUNDS["sphere"]
    name = "CMT-S1"
    tasks, optima = [], []
    radius = 20.0
    for t, u in enumerate((u1, u2), start=1):
        shift = _shift_from_unified("sphere", u)
        normal = rng.standard_normal(dim)
        normal /= np.linalg.norm(normal)
        direction = rng.standard_normal(dim)
        direction /= np.linalg.norm(direction)
        center = shift + 1.5 * radius * direction
        fn = ConstrainedSphere(shift, normal, center, radius)
        tasks.append(TaskSpec(dim, np.full(dim, lo), np.full(dim, hi), 1, fn, 2, f"{name}-T{t}"))
        optima.append(Optimum("value", 0.0))
    return [ProblemInstance(name, tuple(tasks), n, max_fe, tuple(optima),
                            {"suite": config.suite_id, "name": name, "seed": config.seed,
                             "D": config.D, "max_fe": config.max_fe, "N": config.N, **config.extra})]


MTMO4_DIM = 50


def mtmo4_centers() -> tuple[np.ndarray, np.ndarray]:
    """Optimal values of convergence dimensions 2..50 for the two tasks."""
    c1 = np.full(MTMO4_DIM - 1, 0.5)
    c2 = np.full(MTMO4_DIM - 1, 0.5)
    c2[39:] = 0.5005  # dimensions 41..50
    return c1, c2


class _ConvexFrontTask:
    def __init__(self, center):
        self.center = center

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        f1 = x[:, 0]
        g = 1.0 + np.sum((x[:, 1:] - self.center) ** 2, axis=1)
        f2 = g * (1.0 - np.sqrt(np.clip(f1 / g, 0.0, None)))
        return np.column_stack([f1, f2]), np.zeros((x.shape[0], 0))


def convex_front(n: int = FRONT_SAMPLES) -> np.ndarray:
    f1 = np.linspace(0.0, 1.0, n)
    return np.column_stack([f1, 1.0 - np.sqrt(f1)])


def make_mtmo4_replica(config: SuiteConfig | None = None) -> list[ProblemInstance]:
    """Two bi-objective tasks on ``[0, 1]^50`` whose Pareto sets nearly coincide."""
    config = config or SuiteConfig("mtmo4")
    if config.D not in (None, MTMO4_DIM):
        raise ConfigurationError("the MTMO4 replica has a fixed dimension of 50")
    max_fe = config.max_fe or 100_000
    n = config.N or 100
    name = "MTMO4"
    tasks = tuple(
        TaskSpec(MTMO4_DIM, np.zeros(MTMO4_DIM), np.ones(MTMO4_DIM), 2, _ConvexFrontTask(c), 0,
                 f"{name}-T{t}")
        for t, c in enumerate(mtmo4_centers(), start=1)
    )
    front = convex_front()
    return [ProblemInstance(name, tasks, n, max_fe, (Optimum("front", front), Optimum("front", front)),
                            {"suite": config.suite_id, "name": name, "seed": config.seed,
                             "D": None, "max_fe": config.max_fe, "N": config.N, **config.extra})]
