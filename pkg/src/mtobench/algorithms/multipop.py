"""Multi-population algorithms: MP-EKT and the per-task GA / DE baselines."""

from __future__ import annotations

import math

import numpy as np

from ..core import Population, ProblemInstance, RunState, evaluate, feasible_order, feasible_ranks
from ..operators import (
    OperatorParams,
    de_rand_1_bin_batch,
    elitist_select,
    polynomial_mutation,
    sbx_crossover,
    tournament_select,
)
from .base import Algorithm, init_multipopulation, random_unified, task_streams


def explicit_transfer(pops: list[Population], t: int, count: int, elite_fraction: float,
                      rng: np.random.Generator) -> np.ndarray:
    """Unified vectors copied from the elite of a uniformly chosen other task."""
    others = [s for s in range(len(pops)) if s != t]
    source = pops[others[int(rng.integers(len(others)))]]
    n_elite = max(1, math.ceil(elite_fraction * len(source)))
    elite = feasible_order(source.obj[:, 0], source.cv)[:n_elite]
    picks = elite[rng.integers(n_elite, size=count)]
    return source.dec[picks].copy()


def mp_ekt_step(pops: list[Population], problem: ProblemInstance, params: OperatorParams,
                rng: np.random.Generator, state: RunState, transfer_count: int,
                transfer: bool, elite_fraction: float = 0.1) -> list[Population]:
    """One generation over every task: DE offspring, optional elite injection, elitist selection."""
    pops = list(pops)
    for t in range(problem.T):
        if state.remaining == 0:
            break
        n = len(pops[t])
        trial = de_rand_1_bin_batch(pops[t].dec, params, rng)
        if transfer and problem.T > 1 and transfer_count > 0:
            k = min(transfer_count, n)
            slots = rng.choice(n, k, replace=False)
            trial[slots] = explicit_transfer(pops, t, k, elite_fraction, rng)
        trial = trial[: state.remaining]
        offspring = evaluate(problem, t, Population.offspring(trial, problem), state)
        pops[t] = elitist_select(pops[t], offspring, n)
    return pops


class MPEKT(Algorithm):
    """Multi-population DE with explicit elite transfer between tasks."""

    name = "MP-EKT"
    defaults = {"N": None, "de_f": 0.5, "de_cr": 0.9, "transfer_interval": 1,
                "transfer_count": None, "elite_fraction": 0.1}

    def optimize(self, problem, state: RunState):
        n = self.pop_size(problem)
        params = self.operator_params()
        count = self.params["transfer_count"]
        count = math.ceil(0.1 * n) if count is None else int(count)
        interval = max(1, int(self.params["transfer_interval"]))
        pops = init_multipopulation(problem, state, n)
        while state.not_terminated():
            pops = mp_ekt_step(pops, problem, params, state.rng, state, count,
                               state.gen % interval == 0, float(self.params["elite_fraction"]))


def _shares(problem: ProblemInstance) -> list[int]:
    base, extra = divmod(problem.max_fe, problem.T)
    return [base + (1 if t < extra else 0) for t in range(problem.T)]


def ga_generation(pop: Population, problem: ProblemInstance, params: OperatorParams,
                  rng: np.random.Generator) -> np.ndarray:
    """Tournament mating, SBX and polynomial mutation; returns ``len(pop)`` child vectors."""
    n = len(pop)
    keys = feasible_ranks(pop.obj[:, 0], pop.cv)
    half = (n + 1) // 2
    p1 = tournament_select(keys, params.tournament_size, rng, size=half)
    p2 = tournament_select(keys, params.tournament_size, rng, size=half)
    c1, c2 = sbx_crossover(pop.dec[p1], pop.dec[p2], params, rng)
    return polynomial_mutation(np.vstack([c1, c2])[:n], params, rng)


def de_generation(pop: Population, problem: ProblemInstance, task_index: int, params: OperatorParams,
                  rng: np.random.Generator, state: RunState, budget: int) -> Population:
    """DE/rand/1/bin with one-to-one greedy replacement; at most ``budget`` trials."""
    trial = de_rand_1_bin_batch(pop.dec, params, rng)[:budget]
    k = len(trial)
    offspring = evaluate(problem, task_index, Population.offspring(trial, problem), state)
    nxt = pop.copy()
    for i in range(k):
        a = (offspring.obj[i, 0], offspring.cv[i])
        b = (pop.obj[i, 0], pop.cv[i])
        # trial wins ties so the population can drift across plateaus
        if (a[1] == 0 and (b[1] > 0 or a[0] <= b[0])) or (a[1] > 0 and b[1] > 0 and a[1] <= b[1]):
            nxt.dec[i] = offspring.dec[i]
            nxt.obj[i] = offspring.obj[i]
            nxt.con[i] = offspring.con[i]
            nxt.cv[i] = offspring.cv[i]
    return nxt


class _PerTask(Algorithm):
    """Independent single-task optimizer per task, each with an equal budget share."""

    def optimize(self, problem, state: RunState):
        n = self.pop_size(problem)
        params = self.operator_params()
        shares = _shares(problem)
        streams = task_streams(problem, state.rng)
        pops = []
        for t in range(problem.T):
            k = min(n, shares[t])
            pop = Population.offspring(random_unified(streams[t], k, problem.unified_dim), problem)
            pops.append(evaluate(problem, t, pop, state))
        while state.not_terminated():
            for t in range(problem.T):
                budget = shares[t] - state.task_fe[t]
                if budget > 0:
                    pops[t] = self.generation(pops[t], problem, t, params, streams[t], state, budget)

    def generation(self, pop, problem, t, params, rng, state, budget):
        raise NotImplementedError


class GA(_PerTask):
    name = "GA"
    defaults = {"N": None, "sbx_eta": 15.0, "pm_eta": 15.0, "pc": 1.0, "pm": None, "tournament_size": 2}

    def generation(self, pop, problem, t, params, rng, state, budget):
        children = ga_generation(pop, problem, params, rng)[:budget]
        offspring = evaluate(problem, t, Population.offspring(children, problem), state)
        return elitist_select(pop, offspring, len(pop))


class DE(_PerTask):
    name = "DE"
    defaults = {"N": None, "de_f": 0.5, "de_cr": 0.9}

    def generation(self, pop, problem, t, params, rng, state, budget):
        return de_generation(pop, problem, t, params, rng, state, budget)
