"""Variation and selection operators on unified-space vectors.

Every variation operator accepts a single vector or a batch (one row per
individual), draws only from the generator it is given, and returns values in
``[0, 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .core import Population, feasible_order


class OperatorError(ValueError):
    pass


@dataclass(frozen=True)
class OperatorParams:
    sbx_eta: float = 15.0
    pm_eta: float = 15.0
    pc: float = 1.0
    pm: float | None = None  # None means 1 / dimension
    de_f: float = 0.5
    de_cr: float = 0.9
    tournament_size: int = 2

    def __post_init__(self):
        if self.sbx_eta <= 0 or self.pm_eta <= 0:
            raise OperatorError("distribution indices must be positive")
        for name in ("pc", "de_cr"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise OperatorError(f"{name} must lie in [0, 1]")
        if self.pm is not None and not 0.0 <= self.pm <= 1.0:
            raise OperatorError("pm must lie in [0, 1]")
        if not 0.0 <= self.de_f <= 2.0:
            raise OperatorError("de_f must lie in [0, 2]")
        if self.tournament_size < 2:
            raise OperatorError("tournament_size must be >= 2")

    def with_(self, **kw) -> "OperatorParams":
        return replace(self, **kw)

    def mutation_rate(self, dim: int) -> float:
        return 1.0 / dim if self.pm is None else self.pm


DEFAULT_PARAMS = OperatorParams()


def sbx_crossover(p1, p2, params: OperatorParams = DEFAULT_PARAMS, rng=None):
    """Simulated binary crossover; returns ``(c1, c2)`` clamped to ``[0, 1]``."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if p1.shape != p2.shape:
        raise OperatorError("parents must have equal shapes")
    u = rng.random(p1.shape)
    active = rng.random(p1.shape) < params.pc
    e = 1.0 / (params.sbx_eta + 1.0)
    cf = np.where(u <= 0.5, (2.0 * u) ** e, (2.0 * (1.0 - u)) ** -e)
    cf = np.where(active, cf, 1.0)
    # midpoint form: identical parents give exact copies, swapped parents swap children exactly
    mid = 0.5 * (p1 + p2)
    half = 0.5 * cf * (p1 - p2)
    c1 = mid + half
    c2 = mid - half
    return np.clip(c1, 0.0, 1.0), np.clip(c2, 0.0, 1.0)


def polynomial_mutation(x, params: OperatorParams = DEFAULT_PARAMS, rng=None):
    """Per-gene polynomial mutation; the step is scaled by the distance to the bound it moves toward."""
    x = np.asarray(x, dtype=float)
    pm = params.mutation_rate(x.shape[-1])
    mask = rng.random(x.shape) < pm
    u = rng.random(x.shape)
    e = 1.0 / (1.0 + params.pm_eta)
    low = u <= 0.5
    delta = np.where(low, (2.0 * u) ** e - 1.0, 1.0 - (2.0 * (1.0 - u)) ** e)
    moved = np.where(low, x + delta * x, x + delta * (1.0 - x))
    return np.clip(np.where(mask, moved, x), 0.0, 1.0)


def _reflect(v):
    # fold onto [0, 1] as if mirrored at both bounds repeatedly
    v = np.mod(v, 2.0)
    return np.where(v > 1.0, 2.0 - v, v)


def _binomial(target, mutant, cr, rng):
    n, d = target.shape
    mask = rng.random((n, d)) < cr
    jrand = rng.integers(0, d, size=n)
    mask[np.arange(n), jrand] = True
    return np.where(mask, mutant, target)


def de_rand_1_bin(target, donors, params: OperatorParams = DEFAULT_PARAMS, rng=None):
    """DE/rand/1/bin trial vector for one ``target`` from ``donors`` (which exclude it)."""
    target = np.asarray(target, dtype=float)
    donors = np.asarray(donors, dtype=float)
    if donors.ndim != 2 or donors.shape[0] < 3:
        raise OperatorError("DE/rand/1 needs at least 3 donors besides the target")
    r1, r2, r3 = rng.choice(donors.shape[0], 3, replace=False)
    mutant = donors[r1] + params.de_f * (donors[r2] - donors[r3])
    trial = _binomial(target[None, :], mutant[None, :], params.de_cr, rng)[0]
    return _reflect(trial)


def de_rand_1_bin_batch(pop_dec, params: OperatorParams = DEFAULT_PARAMS, rng=None):
    """One DE/rand/1/bin trial per row of ``pop_dec``; donors never include the row itself."""
    pop_dec = np.asarray(pop_dec, dtype=float)
    n = pop_dec.shape[0]
    if n < 4:
        raise OperatorError("DE/rand/1 needs a population of at least 4")
    keys = rng.random((n, n))
    keys[np.arange(n), np.arange(n)] = np.inf
    r = np.argsort(keys, axis=1)[:, :3]
    mutant = pop_dec[r[:, 0]] + params.de_f * (pop_dec[r[:, 1]] - pop_dec[r[:, 2]])
    return _reflect(_binomial(pop_dec, mutant, params.de_cr, rng))


def tournament_select(keys, k: int, rng, size: int | None = None):
    """Index (or ``size`` indices) of tournament winners; lower key wins.

    Entrants are drawn without replacement; ties among the best entrants are
    broken uniformly at random.
    """
    keys = np.asarray(keys, dtype=float)
    n = keys.shape[0]
    if n == 0:
        raise OperatorError("cannot select from an empty population")
    k = min(k, n)
    out = []
    for _ in range(1 if size is None else size):
        entrants = rng.choice(n, k, replace=False) if k < n else rng.permutation(n)
        ek = keys[entrants]
        tied = entrants[ek == ek.min()]
        out.append(int(tied[rng.integers(len(tied))]) if len(tied) > 1 else int(tied[0]))
    return out[0] if size is None else np.array(out, dtype=np.int64)


def nondominated_sort(objs) -> np.ndarray:
    """0-based front index per point (``a`` dominates ``b`` iff ``a <= b`` everywhere and ``a != b``)."""
    objs = np.asarray(objs, dtype=float)
    if objs.ndim == 1:
        objs = objs[:, None]
    return _kernels.nondominated_ranks(objs)


def crowding_distance(front) -> np.ndarray:
    front = np.asarray(front, dtype=float)
    n = front.shape[0]
    if n <= 2:
        return np.full(n, np.inf)
    dist = np.zeros(n)
    for m in range(front.shape[1]):
        order = np.argsort(front[:, m], kind="stable")
        f = front[order, m]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        span = f[-1] - f[0]
        if span > 0:
            dist[order[1:-1]] += (f[2:] - f[:-2]) / span
    return dist


def nsga2_order(objs, cv=None) -> np.ndarray:
    """Indices ordered by (feasibility, front, -crowding); stable on input order.

    Infeasible points come after every feasible one, by increasing ``cv``.
    """
    objs = np.asarray(objs, dtype=float)
    n = objs.shape[0]
    cv = np.zeros(n) if cv is None else np.asarray(cv, dtype=float)
    feas = np.flatnonzero(cv <= 0)
    infeas = np.flatnonzero(cv > 0)
    fronts = np.zeros(n, dtype=np.int64)
    crowd = np.zeros(n)
    if len(feas):
        fronts[feas] = nondominated_sort(objs[feas])
        for f in np.unique(fronts[feas]):
            members = feas[fronts[feas] == f]
            crowd[members] = crowding_distance(objs[members])
    order_feas = feas[np.lexsort((-crowd[feas], fronts[feas]))] if len(feas) else feas
    order_infeas = infeas[np.argsort(cv[infeas], kind="stable")]
    return np.concatenate([order_feas, order_infeas]).astype(np.int64)


def elitist_select(parents: Population, offspring: Population, n: int,
                   mode: str = "single-objective", n_obj: int | None = None) -> Population:
    """(mu + lambda) survivor selection of ``n`` members from parents and offspring."""
    union = Population.concat(parents, offspring)
    if mode == "single-objective":
        order = feasible_order(union.obj[:, 0], union.cv)
    elif mode == "multi-objective":
        cols = union.obj.shape[1] if n_obj is None else n_obj
        order = nsga2_order(union.obj[:, :cols], union.cv)
    else:
        raise OperatorError(f"unknown selection mode {mode!r}")
    return union.take(order[:n])
