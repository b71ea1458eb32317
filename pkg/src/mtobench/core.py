"""Domain types shared by every module: tasks, problems, populations, run state.

Decision vectors live in the unified search space ``[0, 1]^D`` where ``D`` is
the largest task dimension. A task only reads the first ``task.dim``
coordinates of a unified vector; the rest are carried along so that genetic
material can move between tasks of different sizes.

Task indices are 0-based throughout the code base; human-facing labels
(``T1``, ``T2``...) are produced only at export time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

ObjectiveFn = Callable[[np.ndarray], "tuple[np.ndarray, np.ndarray]"]


class DimensionError(ValueError):
    """A vector does not have the length its task requires."""


class ConfigurationError(ValueError):
    """An algorithm/problem/experiment setting is invalid or incompatible."""


def make_rng(seed: int) -> np.random.Generator:
    """The one random stream of a run: numpy ``PCG64`` seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True, eq=False)
class TaskSpec:
    """One optimization task in its native decision space.

    ``objective_fn`` is batched: it receives an ``(n, dim)`` array of native
    decision vectors and returns ``(obj, con)`` with shapes ``(n, M)`` and
    ``(n, C)``. Constraint entries are violation amounts (``0`` = satisfied).
    """

    dim: int
    lower: np.ndarray
    upper: np.ndarray
    num_objectives: int
    objective_fn: ObjectiveFn
    num_constraints: int = 0
    name: str = ""

    def __post_init__(self):
        lower = np.broadcast_to(np.asarray(self.lower, dtype=float), (self.dim,)).copy()
        upper = np.broadcast_to(np.asarray(self.upper, dtype=float), (self.dim,)).copy()
        if self.dim < 1:
            raise ConfigurationError("task dimension must be >= 1")
        if self.num_objectives < 1:
            raise ConfigurationError("task needs at least one objective")
        if not np.all(upper > lower):
            raise ConfigurationError("upper bound must exceed lower bound in every coordinate")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)


@dataclass(frozen=True, eq=False)
class Optimum:
    """Known optimum information for a task.

    ``kind`` is ``"value"`` (scalar optimal objective), ``"front"`` (samples of
    the true Pareto front, one row per point) or ``"reference"`` (a
    hypervolume reference point when the front is unknown).
    """

    kind: str
    data: np.ndarray

    def __post_init__(self):
        if self.kind not in ("value", "front", "reference"):
            raise ValueError(f"unknown optimum kind {self.kind!r}")
        object.__setattr__(self, "data", np.asarray(self.data, dtype=float))


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """A multitask problem: ``T`` tasks sharing one evaluation budget."""

    name: str
    tasks: tuple[TaskSpec, ...]
    default_pop_size: int = 100
    max_fe: int = 100_000
    optimum: tuple[Optimum | None, ...] = ()
    # registry id + overrides, enough to rebuild the instance in a worker
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        tasks = tuple(self.tasks)
        if not tasks:
            raise ConfigurationError("a problem needs at least one task")
        if self.max_fe <= 0:
            raise ConfigurationError("max_fe must be positive")
        if self.default_pop_size <= 0:
            raise ConfigurationError("default population size must be positive")
        optimum = tuple(self.optimum) if self.optimum else (None,) * len(tasks)
        if len(optimum) != len(tasks):
            raise ConfigurationError("one optimum entry per task is required")
        for task, opt in zip(tasks, optimum):
            if opt is not None and opt.kind == "front" and opt.data.shape[1] != task.num_objectives:
                raise ConfigurationError("optimum front width must equal the task's objective count")
        object.__setattr__(self, "tasks", tasks)
        object.__setattr__(self, "optimum", optimum)

    @property
    def T(self) -> int:
        return len(self.tasks)

    @property
    def unified_dim(self) -> int:
        return max(t.dim for t in self.tasks)

    @property
    def multiobjective(self) -> bool:
        return any(t.num_objectives > 1 for t in self.tasks)

    @property
    def constrained(self) -> bool:
        return any(t.num_constraints > 0 for t in self.tasks)

    @property
    def max_objectives(self) -> int:
        return max(t.num_objectives for t in self.tasks)

    @property
    def max_constraints(self) -> int:
        return max(t.num_constraints for t in self.tasks)

    def metadata(self) -> dict:
        return {
            "name": self.name,
            "T": self.T,
            "M": [t.num_objectives for t in self.tasks],
            "D": [t.dim for t in self.tasks],
            "max_fe": self.max_fe,
            "N": self.default_pop_size,
        }


@dataclass
class Individual:
    """A single candidate solution (record view of one population row)."""

    dec: np.ndarray
    obj: np.ndarray
    con: np.ndarray
    cv: float = 0.0
    skill_factor: int | None = None
    scalar_fitness: float | None = None


class Population:
    """Struct-of-arrays population.

    ``obj`` has ``problem.max_objectives`` columns and ``con`` has
    ``problem.max_constraints`` columns; unused objective columns are NaN,
    unused constraint columns are 0. ``skill_factor`` is -1 when unset.
    """

    __slots__ = ("dec", "obj", "con", "cv", "skill_factor", "scalar_fitness")

    def __init__(self, dec, obj=None, con=None, cv=None, skill_factor=None,
                 scalar_fitness=None, n_obj=1, n_con=0):
        dec = np.array(dec, dtype=float, ndmin=2)
        n = dec.shape[0]
        self.dec = dec
        self.obj = np.full((n, n_obj), np.nan) if obj is None else np.array(obj, dtype=float, ndmin=2)
        self.con = np.zeros((n, n_con)) if con is None else np.array(con, dtype=float, ndmin=2)
        self.cv = np.zeros(n) if cv is None else np.array(cv, dtype=float)
        self.skill_factor = (np.full(n, -1, dtype=np.int64) if skill_factor is None
                             else np.array(skill_factor, dtype=np.int64))
        self.scalar_fitness = (np.full(n, np.nan) if scalar_fitness is None
                               else np.array(scalar_fitness, dtype=float))

    def __len__(self):
        return self.dec.shape[0]

    def take(self, idx) -> "Population":
        idx = np.asarray(idx)
        return Population(self.dec[idx], self.obj[idx], self.con[idx], self.cv[idx],
                          self.skill_factor[idx], self.scalar_fitness[idx])

    def copy(self) -> "Population":
        return self.take(np.arange(len(self)))

    @staticmethod
    def concat(*pops: "Population") -> "Population":
        pops = [p for p in pops if p is not None]
        return Population(
            np.vstack([p.dec for p in pops]),
            np.vstack([p.obj for p in pops]),
            np.vstack([p.con for p in pops]),
            np.concatenate([p.cv for p in pops]),
            np.concatenate([p.skill_factor for p in pops]),
            np.concatenate([p.scalar_fitness for p in pops]),
        )

    @classmethod
    def empty(cls, dim: int, n_obj: int, n_con: int) -> "Population":
        return cls(np.empty((0, dim)), np.empty((0, n_obj)), np.empty((0, n_con)))

    @classmethod
    def offspring(cls, dec, problem: ProblemInstance, skill_factor=None) -> "Population":
        return cls(dec, skill_factor=skill_factor,
                   n_obj=problem.max_objectives, n_con=problem.max_constraints)

    def individual(self, i: int) -> Individual:
        sf = int(self.skill_factor[i])
        fit = float(self.scalar_fitness[i])
        return Individual(self.dec[i].copy(), self.obj[i].copy(), self.con[i].copy(),
                          float(self.cv[i]), None if sf < 0 else sf,
                          None if math.isnan(fit) else fit)

    def individuals(self) -> list[Individual]:
        return [self.individual(i) for i in range(len(self))]

    @classmethod
    def from_individuals(cls, inds: Sequence[Individual]) -> "Population":
        return cls(
            [i.dec for i in inds], [i.obj for i in inds], [i.con for i in inds],
            [i.cv for i in inds],
            [-1 if i.skill_factor is None else i.skill_factor for i in inds],
            [np.nan if i.scalar_fitness is None else i.scalar_fitness for i in inds],
        )


# --- unified space -----------------------------------------------------------

def encode_unified(x, task: TaskSpec, unified_dim: int) -> np.ndarray:
    """Map native ``x`` into the unified space; padding coordinates get 0.5.

    Accepts a single vector or an ``(n, dim)`` batch. Values outside the
    task bounds map outside ``[0, 1]`` and are not clipped.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != task.dim:
        raise DimensionError(f"expected {task.dim} native coordinates, got {x.shape[-1]}")
    if unified_dim < task.dim:
        raise DimensionError("unified dimension smaller than task dimension")
    y = np.full(x.shape[:-1] + (unified_dim,), 0.5)
    y[..., : task.dim] = (x - task.lower) / (task.upper - task.lower)
    return y


def decode_unified(y, task: TaskSpec) -> np.ndarray:
    """Native decision vector(s) from the first ``task.dim`` unified coordinates."""
    y = np.asarray(y, dtype=float)
    if y.shape[-1] < task.dim:
        raise DimensionError(f"unified vector has {y.shape[-1]} coordinates, task needs {task.dim}")
    return task.lower + y[..., : task.dim] * (task.upper - task.lower)


# --- feasibility ordering ----------------------------------------------------

def compare_feasible(a, b) -> int:
    """Order two ``(objective, cv)`` pairs: -1 if ``a`` is better, 1 if ``b``, else 0."""
    (fa, cva), (fb, cvb) = a, b
    if cva == 0 and cvb == 0:
        key_a, key_b = fa, fb
    elif cva == 0:
        return -1
    elif cvb == 0:
        return 1
    else:
        key_a, key_b = cva, cvb
    if key_a < key_b:
        return -1
    if key_b < key_a:
        return 1
    return 0


def feasible_order(obj, cv) -> np.ndarray:
    """Stable argsort of candidates under :func:`compare_feasible` (best first)."""
    obj = np.asarray(obj, dtype=float)
    cv = np.asarray(cv, dtype=float)
    infeasible = cv > 0
    secondary = np.where(infeasible, cv, obj)
    return np.lexsort((secondary, infeasible))


def feasible_ranks(obj, cv) -> np.ndarray:
    """1-based competition ranks under :func:`compare_feasible` (ties share a rank)."""
    obj = np.asarray(obj, dtype=float)
    cv = np.asarray(cv, dtype=float)
    order = feasible_order(obj, cv)
    infeasible = (cv > 0)[order]
    secondary = np.where(infeasible, cv[order], obj[order])
    ranks = np.empty(len(order), dtype=np.int64)
    current = 1
    for pos in range(len(order)):
        if pos > 0 and (infeasible[pos] != infeasible[pos - 1] or secondary[pos] != secondary[pos - 1]):
            current = pos + 1
        ranks[order[pos]] = current
    return ranks


# --- run state ---------------------------------------------------------------

@dataclass
class RunResult:
    """Convergence record of one (problem, algorithm, rep) run.

    Per task ``t``: single-objective ``obj[t]``/``cv[t]`` have shape ``(G,)``
    and ``dec[t]`` ``(G, D_t)``; multi-objective ``obj[t]`` is
    ``(G, N, M_t)``, ``cv[t]`` ``(G, N)`` and ``dec[t]`` ``(G, N, D_t)``.
    Decision vectors are native (decoded) and present only with ``save_dec``.
    """

    obj: list
    cv: list
    dec: list | None
    fe: np.ndarray
    wall_time: float = 0.0
    seed: int = 0
    nan_count: int = 0
    multiobjective: bool = False

    @property
    def T(self) -> int:
        return len(self.obj)

    @property
    def G(self) -> int:
        return len(self.fe)

    @property
    def obj_matrix(self) -> np.ndarray:
        """``T x G`` best-objective matrix (single-objective problems only)."""
        if self.multiobjective:
            raise ValueError("obj_matrix is defined for single-objective results only")
        return np.vstack(self.obj)

    @property
    def cv_matrix(self) -> np.ndarray:
        if self.multiobjective:
            raise ValueError("cv_matrix is defined for single-objective results only")
        return np.vstack(self.cv)


def checkpoint_thresholds(max_fe: int, G: int) -> np.ndarray:
    """Evaluation counts at which snapshots are due: ``G`` points spanning ``[0, max_fe]``."""
    if G < 1:
        raise ConfigurationError("G must be >= 1")
    if G == 1:
        return np.array([float(max_fe)])
    return np.linspace(0.0, float(max_fe), G)


class RunState:
    """Mutable state of a single run: budget accounting, bests, convergence log."""

    def __init__(self, problem: ProblemInstance, rng: np.random.Generator, G: int = 50,
                 save_dec: bool = False):
        self.problem = problem
        self.rng = rng
        self.G = G
        self.save_dec = save_dec
        self.fe = 0
        self.gen = 0
        self.nan_count = 0
        self.task_fe = [0] * problem.T
        # single-objective best-so-far per task: (obj, cv, unified dec)
        self.best: list[tuple[float, float, np.ndarray] | None] = [None] * problem.T
        self._thresholds = checkpoint_thresholds(problem.max_fe, G)
        self._next = 0
        self._snapshots: list[tuple[int, list]] = []

    @property
    def remaining(self) -> int:
        return max(self.problem.max_fe - self.fe, 0)

    def not_terminated(self, pops: Sequence[Population] | None = None) -> bool:
        """Record due checkpoints; False once the budget is spent.

        ``pops`` is the current per-task population list; it is needed for
        multi-objective snapshots and ignored otherwise.
        """
        done = self.fe >= self.problem.max_fe
        last = self.G - 1
        while self._next < last and self.fe >= self._thresholds[self._next]:
            self._snapshot(pops)
        if done:
            while self._next <= last:
                self._snapshot(pops)
            return False
        self.gen += 1
        return True

    def _snapshot(self, pops):
        problem = self.problem
        per_task = []
        for t, task in enumerate(problem.tasks):
            if problem.multiobjective:
                pop = pops[t]
                obj = pop.obj[:, : task.num_objectives].copy()
                dec = decode_unified(pop.dec, task) if self.save_dec else None
                per_task.append((obj, pop.cv.copy(), dec))
            else:
                best = self.best[t]
                if best is None:
                    per_task.append((np.inf, np.inf, np.full(task.dim, np.nan) if self.save_dec else None))
                else:
                    dec = decode_unified(best[2], task) if self.save_dec else None
                    per_task.append((best[0], best[1], dec))
        self._snapshots.append((self.fe, per_task))
        self._next += 1

    def result(self, wall_time: float = 0.0, seed: int = 0) -> RunResult:
        T = self.problem.T
        objs, cvs, decs = [], [], []
        for t in range(T):
            objs.append(np.array([s[1][t][0] for s in self._snapshots], dtype=float))
            cvs.append(np.array([s[1][t][1] for s in self._snapshots], dtype=float))
            if self.save_dec:
                decs.append(np.array([s[1][t][2] for s in self._snapshots], dtype=float))
        fe = np.array([s[0] for s in self._snapshots], dtype=np.int64)
        return RunResult(objs, cvs, decs if self.save_dec else None, fe, wall_time, seed,
                         self.nan_count, self.problem.multiobjective)


def evaluate(problem: ProblemInstance, task_index: int, pop: Population, state: RunState) -> Population:
    """Evaluate every member of ``pop`` on one task, in place; returns ``pop``.

    Non-finite objective or constraint values become ``+inf`` and are counted
    in ``state.nan_count``.
    """
    if not 0 <= task_index < problem.T:
        raise IndexError(f"task index {task_index} out of range for {problem.T} tasks")
    n = len(pop)
    if n == 0:
        return pop
    task = problem.tasks[task_index]
    x = decode_unified(pop.dec, task)
    with np.errstate(all="ignore"):
        obj, con = task.objective_fn(x)
    obj = np.array(obj, dtype=float).reshape(n, task.num_objectives)
    con = np.array(con, dtype=float).reshape(n, -1) if task.num_constraints else np.zeros((n, 0))
    bad = ~np.isfinite(obj)
    bad_con = np.isnan(con) | np.isposinf(con)
    if bad.any() or bad_con.any():
        state.nan_count += int(bad.sum() + bad_con.sum())
        obj[bad] = np.inf
        con[bad_con] = np.inf
    con = np.maximum(con, 0.0)
    pop.obj[:, :] = np.nan
    pop.obj[:, : task.num_objectives] = obj
    if pop.con.shape[1]:
        pop.con[:, :] = 0.0
        pop.con[:, : con.shape[1]] = con
    pop.cv[:] = con.sum(axis=1) if con.shape[1] else 0.0
    pop.skill_factor[:] = task_index
    state.fe += n
    state.task_fe[task_index] += n
    if task.num_objectives == 1:
        i = int(feasible_order(pop.obj[:, 0], pop.cv)[0])
        cand = (float(pop.obj[i, 0]), float(pop.cv[i]))
        best = state.best[task_index]
        if best is None or compare_feasible(cand, best[:2]) < 0:
            state.best[task_index] = (cand[0], cand[1], pop.dec[i].copy())
    return pop
