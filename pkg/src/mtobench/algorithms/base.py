"""Algorithm contract: parameters, compatibility tags, and the run loop."""

from __future__ import annotations

import time
import zlib

import numpy as np

from ..core import (
    ConfigurationError,
    Population,
    ProblemInstance,
    RunResult,
    RunState,
    evaluate,
    make_rng,
)
from ..operators import OperatorParams

_OPERATOR_KEYS = ("sbx_eta", "pm_eta", "pc", "pm", "de_f", "de_cr", "tournament_size")


class Algorithm:
    """Base class for all optimizers.

    Subclasses set ``name``, ``defaults`` and ``tags`` and implement
    :meth:`optimize`, which must draw randomness only from ``state.rng`` (or
    streams derived from it) and loop on ``state.not_terminated(...)``.
    """

    name: str = "Algorithm"
    defaults: dict = {}
    # objective: "single" | "multi"; constrained: handles constraint violations
    tags: dict = {"tasks": "multi", "objective": "single", "constrained": True}

    def __init__(self, **params):
        self.params = dict(self.defaults)
        self.set_parameter(**params)

    def get_parameter(self) -> dict:
        return dict(self.params)

    def set_parameter(self, **params) -> None:
        unknown = set(params) - set(self.defaults)
        if unknown:
            raise ConfigurationError(f"{self.name} has no parameter(s) {sorted(unknown)}")
        self.params.update(params)

    def __repr__(self):
        return f"{type(self).__name__}({self.params})"

    def check_compatible(self, problem: ProblemInstance) -> None:
        if problem.multiobjective and self.tags["objective"] != "multi":
            raise ConfigurationError(f"{self.name} is single-objective; {problem.name} is multi-objective")
        if not problem.multiobjective and self.tags["objective"] == "multi":
            raise ConfigurationError(f"{self.name} is multi-objective; {problem.name} is single-objective")
        if problem.constrained and not self.tags["constrained"]:
            raise ConfigurationError(f"{self.name} does not handle constraints")

    def pop_size(self, problem: ProblemInstance) -> int:
        n = self.params.get("N")
        return int(problem.default_pop_size if n is None else n)

    def operator_params(self) -> OperatorParams:
        return OperatorParams(**{k: self.params[k] for k in _OPERATOR_KEYS if k in self.params})

    def run(self, problem: ProblemInstance, seed: int = 0, G: int = 50, save_dec: bool = False) -> RunResult:
        self.check_compatible(problem)
        state = RunState(problem, make_rng(seed), G, save_dec)
        start = time.perf_counter()
        self.optimize(problem, state)
        return state.result(time.perf_counter() - start, seed)

    def optimize(self, problem: ProblemInstance, state: RunState) -> None:
        raise NotImplementedError


def random_unified(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    return rng.random((n, dim))


def init_multipopulation(problem: ProblemInstance, state: RunState, n: int, rngs=None) -> list[Population]:
    """One evaluated population of size ``n`` per task (trimmed to the budget)."""
    pops = []
    for t in range(problem.T):
        rng = state.rng if rngs is None else rngs[t]
        k = min(n, state.remaining)
        pop = Population.offspring(random_unified(rng, k, problem.unified_dim), problem)
        pops.append(evaluate(problem, t, pop, state))
    return pops


def init_multifactorial(problem: ProblemInstance, state: RunState, n: int) -> Population:
    """A mixed population of ``n`` individuals per task, each evaluated on its own task only."""
    total = min(n * problem.T, state.remaining)
    dec = random_unified(state.rng, n * problem.T, problem.unified_dim)[:total]
    factors = np.repeat(np.arange(problem.T), n)[:total]
    pop = Population.offspring(dec, problem, factors)
    return evaluate_by_factor(problem, pop, state)


def evaluate_by_factor(problem: ProblemInstance, pop: Population, state: RunState) -> Population:
    """Selective evaluation: each individual is evaluated only on its skill-factor task."""
    parts = []
    for t in range(problem.T):
        idx = np.flatnonzero(pop.skill_factor == t)
        if len(idx):
            parts.append(evaluate(problem, t, pop.take(idx), state))
    return Population.concat(*parts) if parts else pop


def split_by_factor(pop: Population, T: int) -> list[Population]:
    return [pop.take(np.flatnonzero(pop.skill_factor == t)) for t in range(T)]


def task_streams(problem: ProblemInstance, seed_rng: np.random.Generator) -> list[np.random.Generator]:
    """Independent generators per task, keyed by task name so task order does not matter."""
    root = int(seed_rng.integers(0, 2**63))
    streams = []
    for t, task in enumerate(problem.tasks):
        key = zlib.crc32(task.name.encode()) if task.name else t
        streams.append(np.random.Generator(np.random.PCG64(np.random.SeedSequence([root, key]))))
    return streams
