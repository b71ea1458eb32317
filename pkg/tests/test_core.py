import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtobench.algorithms import GA
from mtobench.core import (
    ConfigurationError,
    DimensionError,
    Individual,
    Optimum,
    Population,
    ProblemInstance,
    RunState,
    TaskSpec,
    checkpoint_thresholds,
    compare_feasible,
    decode_unified,
    encode_unified,
    evaluate,
    feasible_order,
    feasible_ranks,
    make_rng,
)


def sphere_task(dim=3, lo=-5.0, hi=5.0, shift=0.0, counter=None, name="S"):
    def fn(x):
        if counter is not None:
            counter[0] += len(x)
        return np.sum((x - shift) ** 2, axis=1)[:, None], np.zeros((len(x), 0))
    return TaskSpec(dim, np.full(dim, lo), np.full(dim, hi), 1, fn, 0, name)


def test_encode_examples():
    task = sphere_task(1)
    np.testing.assert_array_equal(encode_unified([-5.0], task, 1), [0.0])
    np.testing.assert_array_equal(encode_unified([5.0], task, 1), [1.0])
    np.testing.assert_array_equal(encode_unified([2.5], task, 1), [0.75])


def test_encode_pads_with_half():
    y = encode_unified([0.0, 0.0, 0.0], sphere_task(3), 6)
    np.testing.assert_array_equal(y, [0.5] * 6)


def test_encode_length_mismatch():
    with pytest.raises(DimensionError):
        encode_unified([0.0, 1.0], sphere_task(3), 3)


def test_decode_uses_leading_components():
    task = TaskSpec(10, np.zeros(10), np.ones(10), 1, lambda x: (x[:, :1], np.zeros((len(x), 0))))
    x = decode_unified(np.full(50, 0.5), task)
    assert x.shape == (10,)
    np.testing.assert_array_equal(x, 0.5)
    with pytest.raises(DimensionError):
        decode_unified(np.zeros(5), task)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8), st.integers(0, 4), st.integers(0, 2**32 - 1))
def test_round_trip(dim, extra, seed):
    rng = np.random.default_rng(seed)
    lo = rng.uniform(-100, 100, dim)
    hi = lo + rng.uniform(1e-3, 200, dim)
    task = TaskSpec(dim, lo, hi, 1, lambda x: (x[:, :1], np.zeros((len(x), 0))))
    x = rng.uniform(lo, hi)
    assert np.max(np.abs(decode_unified(encode_unified(x, task, dim + extra), task) - x)) < 1e-12


def test_task_invariants():
    with pytest.raises(ConfigurationError):
        TaskSpec(2, [0, 0], [1, 0], 1, None)
    with pytest.raises(ConfigurationError):
        TaskSpec(0, [], [], 1, None)
    with pytest.raises(ConfigurationError):
        TaskSpec(1, [0], [1], 0, None)


def test_problem_invariants():
    t1, t2 = sphere_task(3), sphere_task(7)
    p = ProblemInstance("P", (t1, t2), 10, 100)
    assert p.unified_dim == 7 and p.T == 2
    with pytest.raises(ConfigurationError):
        ProblemInstance("P", (t1,), 10, 0)
    with pytest.raises(ConfigurationError):
        ProblemInstance("P", (t1,), 10, 10, (Optimum("front", np.zeros((3, 2))),))


def test_compare_feasible_examples():
    assert compare_feasible((1.0, 0), (0.5, 0.1)) == -1
    assert compare_feasible((1.0, 0), (0.5, 0)) == 1
    assert compare_feasible((1.0, 0.2), (2.0, 0.1)) == 1
    assert compare_feasible((1.0, 0.0), (1.0, 0.0)) == 0


def test_compare_feasible_total_preorder():
    rng = np.random.default_rng(0)
    vals = [(float(rng.integers(0, 3)), float(rng.choice([0.0, 0.0, 0.5, 1.0]))) for _ in range(12)]
    for a, b in itertools.product(vals, repeat=2):
        assert compare_feasible(a, b) == -compare_feasible(b, a)
    for a, b, c in itertools.product(vals, repeat=3):
        if compare_feasible(a, b) <= 0 and compare_feasible(b, c) <= 0:
            assert compare_feasible(a, c) <= 0


def test_feasible_order_and_ranks_agree_with_comparator():
    rng = np.random.default_rng(1)
    obj = rng.integers(0, 4, 30).astype(float)
    cv = rng.choice([0.0, 0.0, 0.3, 0.7], 30)
    order = feasible_order(obj, cv)
    for i, j in zip(order[:-1], order[1:]):
        assert compare_feasible((obj[i], cv[i]), (obj[j], cv[j])) <= 0
    ranks = feasible_ranks(obj, cv)
    for i in range(30):
        better = sum(compare_feasible((obj[j], cv[j]), (obj[i], cv[i])) < 0 for j in range(30))
        assert ranks[i] == better + 1


def _state(problem, G=5):
    return RunState(problem, make_rng(0), G)


def test_evaluate_counts_and_minimum():
    counter = [0]
    task = sphere_task(3, shift=1.0, counter=counter)
    problem = ProblemInstance("P", (task,), 10, 100)
    state = _state(problem)
    empty = Population.empty(3, 1, 0)
    evaluate(problem, 0, empty, state)
    assert state.fe == 0 and counter[0] == 0
    pop = Population(np.random.default_rng(0).random((10, 3)), skill_factor=None)
    pop = Population.offspring(pop.dec, problem)
    evaluate(problem, 0, pop, state)
    assert state.fe == 10 and counter[0] == 10
    at_shift = Population.offspring(encode_unified([1.0, 1.0, 1.0], task, 3)[None, :], problem)
    evaluate(problem, 0, at_shift, state)
    assert at_shift.obj[0, 0] == 0.0
    assert state.best[0][0] == 0.0


def test_evaluate_nan_becomes_inf():
    def bad(x):
        return np.full((len(x), 1), np.nan), np.zeros((len(x), 0))
    task = TaskSpec(2, [0, 0], [1, 1], 1, bad)
    problem = ProblemInstance("P", (task,), 4, 100)
    state = _state(problem)
    pop = evaluate(problem, 0, Population.offspring(np.full((3, 2), 0.5), problem), state)
    assert np.all(np.isposinf(pop.obj[:, 0]))
    assert state.nan_count == 3


def test_individual_view_and_cv():
    task = sphere_task(2)
    problem = ProblemInstance("P", (task,), 4, 100)
    pop = evaluate(problem, 0, Population.offspring(np.full((2, 2), 0.25), problem), _state(problem))
    ind = pop.individual(0)
    assert isinstance(ind, Individual)
    assert ind.cv == pytest.approx(float(np.sum(ind.con)))
    assert ind.skill_factor == 0
    back = Population.from_individuals(pop.individuals())
    np.testing.assert_array_equal(back.dec, pop.dec)


def test_checkpoint_thresholds():
    np.testing.assert_array_equal(checkpoint_thresholds(100, 2), [0.0, 100.0])
    assert len(checkpoint_thresholds(1000, 50)) == 50


def ga_problem(max_fe=2000, G=2):
    return ProblemInstance("S1", (sphere_task(5, -100, 100),), 20, max_fe, (Optimum("value", 0.0),))


def test_g2_history_and_final_snapshot():
    res = GA().run(ga_problem(), seed=3, G=2)
    assert res.G == 2
    assert res.fe[0] <= 40
    assert res.fe[-1] == 2000


def test_single_objective_series_monotone():
    res = GA().run(ga_problem(4000), seed=1, G=20)
    assert np.all(np.diff(res.obj[0]) <= 0)


def test_fe_equals_objective_calls():
    counter = [0]
    problem = ProblemInstance("S1", (sphere_task(4, counter=counter),), 16, 3000)
    res = GA().run(problem, seed=0, G=10)
    assert counter[0] == res.fe[-1] == 3000


def test_determinism_bit_identical():
    a = GA().run(ga_problem(3000), seed=7, G=10)
    b = GA().run(ga_problem(3000), seed=7, G=10)
    np.testing.assert_array_equal(a.obj[0], b.obj[0])
    np.testing.assert_array_equal(a.fe, b.fe)
