import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import rankdata

from mtobench.stats import annotate, compare, friedman, ranksum, signrank


def _exact_ranksum(x, y):
    pooled = np.concatenate([x, y])
    ranks = rankdata(pooled)
    n1 = len(x)
    mu = n1 * (len(pooled) + 1) / 2
    w = ranks[:n1].sum()
    sums = [ranks[list(c)].sum() for c in itertools.combinations(range(len(pooled)), n1)]
    return np.mean([abs(s - mu) >= abs(w - mu) - 1e-9 for s in sums])


def _exact_signrank(d):
    r = rankdata(np.abs(d))
    n = len(d)
    mu = n * (n + 1) / 4
    wp = r[d > 0].sum()
    sums = [r[np.array(s) > 0].sum() for s in itertools.product([1, -1], repeat=n)]
    return np.mean([abs(s - mu) >= abs(wp - mu) - 1e-9 for s in sums])


def test_ranksum_identical_samples():
    x = np.array([3.0, 1.0, 4.0, 1.5, 9.0])
    assert ranksum(x, x) >= 0.99


def test_ranksum_separated_against_enumeration():
    x, y = np.array([1.0, 2.0, 3.0]), np.array([4.0, 5.0, 6.0])
    assert abs(ranksum(x, y) - _exact_ranksum(x, y)) <= 0.05
    assert ranksum(x, y) == ranksum(y, x)


def test_ranksum_every_split_against_enumeration():
    vals = np.arange(1.0, 7.0)
    for c in itertools.combinations(range(6), 3):
        x = vals[list(c)]
        y = np.delete(vals, list(c))
        assert abs(ranksum(x, y) - _exact_ranksum(x, y)) <= 0.05


def test_ranksum_ties_and_degenerate():
    assert ranksum([1, 1, 1], [1, 1, 1]) == 1.0
    assert ranksum([], [1.0]) == 1.0
    p = ranksum([1, 1, 2, 2], [2, 3, 3, 3])
    assert 0 <= p <= 1


def test_signrank_examples():
    x = np.array([1.0, 2.0, 3.0])
    assert signrank(x, x) == 1.0
    d = np.array([0.5, 1.2, 2.1, 3.3, 4.0, 5.7])
    for signs in itertools.product([1, -1], repeat=6):
        dd = d * np.array(signs)
        assert abs(signrank(dd, np.zeros(6)) - _exact_signrank(dd)) <= 0.05
    y = np.array([0.1, 0.4, 0.2, 0.9, 0.3, 0.6])
    assert signrank(y + d, y) == signrank(y, y + d)


def test_friedman_identical_columns():
    table = np.tile(np.arange(5.0)[:, None], (1, 3))
    rep = friedman(table)
    np.testing.assert_allclose(rep.mean_ranks, 2.0)
    assert rep.chi2 == 0.0


def test_friedman_one_always_best():
    rng = np.random.default_rng(0)
    table = rng.random((4, 3)) + 1.0
    table[:, 1] = 0.0
    rep = friedman(table, base=1)
    assert rep.mean_ranks[1] == 1.0
    assert np.isnan(rep.posthoc_z[1]) and np.all(rep.posthoc_z[[0, 2]] < 0)


def test_friedman_brute_force():
    table = np.array([[1.0, 2.0, 3.0], [2.0, 1.0, 3.0], [3.0, 3.0, 1.0]])
    n, k = table.shape
    ranks = np.zeros_like(table)
    for i, row in enumerate(table):
        for j in range(k):
            ranks[i, j] = 1 + sum(v < row[j] for v in row) + 0.5 * (sum(v == row[j] for v in row) - 1)
    rbar = ranks.mean(axis=0)
    chi = 12 * n / (k * (k + 1)) * np.sum((rbar - (k + 1) / 2) ** 2)
    rep = friedman(table, base=0)
    np.testing.assert_allclose(rep.mean_ranks, rbar)
    assert rep.chi2 == pytest.approx(chi)
    assert ranks.sum() == n * k * (k + 1) / 2
    z = (rbar[0] - rbar[2]) / np.sqrt(k * (k + 1) / (6 * n))
    assert rep.posthoc_z[2] == pytest.approx(z)


def test_friedman_modes_and_orientation():
    rng = np.random.default_rng(1)
    t = rng.random((3, 4, 5))
    mean = friedman(t, "mean")
    allr = friedman(t, "all-reps")
    assert 0 <= mean.chi2_p <= 1 and 0 <= allr.chi2_p <= 1
    flipped = friedman(t, "all-reps", orientation="Max")
    np.testing.assert_allclose(flipped.mean_ranks, 5 - allr.mean_ranks)
    with pytest.raises(ValueError):
        friedman(t, "bogus")


def test_friedman_nan_ranks_last():
    table = np.array([[np.nan, 1.0, 2.0]])
    assert friedman(table).mean_ranks.tolist() == [3.0, 1.0, 2.0]


def test_compare_median_then_mean():
    assert compare([1, 2, 3], [2, 2, 2], "Min") == "="
    assert compare([1, 1, 10], [1, 1, 5], "Min") == "-"
    assert compare([0, 1, 2], [1, 1, 1], "Min") == "="
    assert compare([0, 1, 2], [1, 1, 1], "Max") == "="
    assert compare([0.0], [1.0], "Max") == "-"


def test_annotate_markers():
    rng = np.random.default_rng(2)
    good = rng.random(20)
    bad = rng.random(20) + 5.0
    table = np.stack([np.stack([bad, good, bad])])
    rep = annotate(table, base=0, column_names=["B", "G", "S"])
    assert rep.markers == [["", "+", "="]]
    assert rep.summary() == {"G": {"+": 1, "-": 0, "=": 0}, "S": {"+": 0, "-": 0, "=": 1}}
    flipped = annotate(table, base=0, orientation="Max")
    assert flipped.markers == [["", "-", "="]]
    signed = annotate(table, base="B", test="signrank", column_names=["B", "G", "S"])
    assert signed.markers[0][1] == "+"
    with pytest.raises(ValueError):
        annotate(table, test="ttest")


# integer-valued samples keep the transforms below injective in floating point
reps = st.lists(st.integers(-1000, 1000).map(float), min_size=4, max_size=12)


@settings(max_examples=50, deadline=None)
@given(reps, reps)
def test_monotone_invariance_and_symmetry(x, y):
    x, y = np.array(x), np.array(y)
    p = ranksum(x, y)
    assert 0 <= p <= 1 and p == ranksum(y, x)
    assert ranksum(np.arctan(x / 100), np.arctan(y / 100)) == pytest.approx(p)
    n = min(len(x), len(y))
    table = np.stack([np.stack([x[:n], y[:n]])])
    m1 = annotate(table).markers
    m2 = annotate(np.exp(table / 1e3)).markers
    assert m1 == m2
