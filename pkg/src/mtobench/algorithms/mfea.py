"""Multifactorial algorithms: MFEA and its multi-objective variant MO-MFEA."""

from __future__ import annotations

import numpy as np

from ..core import Population, ProblemInstance, RunState, feasible_ranks
from ..operators import OperatorParams, nsga2_order, polynomial_mutation, sbx_crossover
from .base import Algorithm, evaluate_by_factor, init_multifactorial, split_by_factor


def mfea_step(population: Population, problem: ProblemInstance, rmp: float,
              params: OperatorParams, rng: np.random.Generator) -> Population:
    """Assortative mating: one unevaluated offspring per parent, with inherited skill factors.

    Parents are paired at random. Pairs sharing a skill factor, and mixed
    pairs with probability ``rmp``, undergo SBX followed by polynomial
    mutation and each child imitates a uniformly chosen parent's factor.
    Other mixed pairs are only mutated, each child keeping its parent's factor.
    """
    n = len(population)
    perm = rng.permutation(n)
    if n % 2:
        perm = np.append(perm, perm[rng.integers(n - 1)])
    a, b = perm[0::2], perm[1::2]
    pa, pb = population.dec[a], population.dec[b]
    fa, fb = population.skill_factor[a], population.skill_factor[b]
    c1, c2 = sbx_crossover(pa, pb, params, rng)
    cross = (fa == fb) | (rng.random(len(a)) < rmp)
    c1 = np.where(cross[:, None], c1, pa)
    c2 = np.where(cross[:, None], c2, pb)
    children = polynomial_mutation(np.vstack([c1, c2]), params, rng)
    # vertical cultural transmission
    pick1 = rng.random(len(a)) < 0.5
    pick2 = rng.random(len(a)) < 0.5
    s1 = np.where(cross & pick1, fb, fa)
    s2 = np.where(cross & pick2, fa, fb)
    factors = np.concatenate([s1, s2])
    return Population.offspring(children[:n], problem, factors[:n])


def scalar_fitness(population: Population, T: int | None = None) -> np.ndarray:
    """``1 / factorial rank`` on each individual's own skill-factor task."""
    T = int(population.skill_factor.max()) + 1 if T is None else T
    fitness = np.zeros(len(population))
    for t in range(T):
        idx = np.flatnonzero(population.skill_factor == t)
        if len(idx):
            fitness[idx] = 1.0 / feasible_ranks(population.obj[idx, 0], population.cv[idx])
    return fitness


class MFEA(Algorithm):
    name = "MFEA"
    defaults = {"rmp": 0.3, "N": None, "sbx_eta": 15.0, "pm_eta": 15.0, "pc": 1.0, "pm": None}
    tags = {"tasks": "multi", "objective": "single", "constrained": True}

    def optimize(self, problem, state: RunState):
        n = self.pop_size(problem)
        params = self.operator_params()
        rmp = float(self.params["rmp"])
        population = init_multifactorial(problem, state, n)
        population.scalar_fitness = scalar_fitness(population, problem.T)
        while state.not_terminated():
            offspring = mfea_step(population, problem, rmp, params, state.rng)
            offspring = offspring.take(np.arange(min(len(offspring), state.remaining)))
            offspring = evaluate_by_factor(problem, offspring, state)
            union = Population.concat(population, offspring)
            union.scalar_fitness = scalar_fitness(union, problem.T)
            order = np.argsort(-union.scalar_fitness, kind="stable")
            population = union.take(order[: n * problem.T])


def mo_select(population: Population, T: int, n: int, n_obj: int) -> Population:
    """Keep ``n`` members per task by non-dominated sorting and crowding distance."""
    kept = []
    for t in range(T):
        idx = np.flatnonzero(population.skill_factor == t)
        order = nsga2_order(population.obj[idx, :n_obj], population.cv[idx])
        kept.append(idx[order[:n]])
    return population.take(np.concatenate(kept))


def mo_mfea_step(population: Population, problem: ProblemInstance, rmp: float, params: OperatorParams,
                 rng: np.random.Generator, state: RunState, n: int) -> Population:
    """One MO-MFEA generation: mate, evaluate selectively, select ``n`` survivors per task."""
    offspring = mfea_step(population, problem, rmp, params, rng)
    offspring = offspring.take(np.arange(min(len(offspring), state.remaining)))
    offspring = evaluate_by_factor(problem, offspring, state)
    union = Population.concat(population, offspring)
    return mo_select(union, problem.T, n, problem.max_objectives)


class MOMFEA(Algorithm):
    name = "MO-MFEA"
    defaults = {"rmp": 0.3, "N": None, "sbx_eta": 15.0, "pm_eta": 15.0, "pc": 1.0, "pm": None}
    tags = {"tasks": "multi", "objective": "multi", "constrained": True}

    def optimize(self, problem, state: RunState):
        n = self.pop_size(problem)
        params = self.operator_params()
        rmp = float(self.params["rmp"])
        population = init_multifactorial(problem, state, n)
        while state.not_terminated(split_by_factor(population, problem.T)):
            population = mo_mfea_step(population, problem, rmp, params, state.rng, state, n)
