import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from tlcbounds.errors import InvalidArgumentError, ResourceLimitError
from tlcbounds.rng import RngState, to_unit, words, stream_keys
from tlcbounds.splits import (
    DrawVector,
    SplitPlan,
    all_masks,
    batch_draws,
    batch_test_sequences,
    enumerate_splits,
    format_indices,
    parse_indices,
    perturb_coordinate,
    randperm_prefix,
    run_randperm,
    sampled_masks,
    split_from_draws,
)


def trace_swaps(n, draws):
    # textbook loop written independently of the library
    perm = list(range(1, n + 1))
    out = []
    for i, d in enumerate(draws, start=1):
        out.append(perm[d - 1])
        perm[i - 1], perm[d - 1] = perm[d - 1], perm[i - 1]
    return tuple(out)


def test_identity_draws_cause_no_swaps():
    plan = split_from_draws(DrawVector(3, (1, 2, 3)))
    assert plan.test_sequence == (1, 2, 3)
    assert plan.train_set == frozenset()


def test_forced_draws_hand_trace():
    plan = split_from_draws(DrawVector(3, (3, 2)))
    assert plan.test_sequence == (3, 2)
    assert plan.train_set == {1}


@pytest.mark.parametrize("n,u", [(0, 1), (3, 0), (3, 4)])
def test_randperm_prefix_rejects_bad_sizes(n, u):
    with pytest.raises(InvalidArgumentError):
        randperm_prefix(n, u, RngState(1))


def test_draw_vector_validates_entries():
    with pytest.raises(InvalidArgumentError):
        DrawVector(3, (0, 2))
    with pytest.raises(InvalidArgumentError):
        DrawVector(3, (1, 4))
    with pytest.raises(InvalidArgumentError):
        DrawVector(3, ())


def test_rng_is_reproducible_and_streams_differ():
    a = [RngState(42).next_u64() for _ in range(1)]
    b = [RngState(42).next_u64() for _ in range(1)]
    assert a == b
    r1, r2 = RngState(42, 0), RngState(42, 1)
    assert [r1.next_u64() for _ in range(5)] != [r2.next_u64() for _ in range(5)]


def test_rng_rejects_bad_seed():
    with pytest.raises(ValueError):
        RngState(-1)
    with pytest.raises(ValueError):
        RngState(1).randint(3, 2)


def test_scalar_and_batch_draws_agree():
    n, u, seed = 9, 4, 1234
    batch = batch_draws(n, u, seed, np.arange(50, dtype=np.uint64))
    for t in range(50):
        d, plan = randperm_prefix(n, u, RngState(seed, t))
        assert d.entries == tuple(batch[t])
    seqs = batch_test_sequences(n, batch) + 1
    for t in range(50):
        assert tuple(seqs[t]) == trace_swaps(n, batch[t])


def test_unit_doubles_in_range():
    w = words(stream_keys(7, "splits", np.arange(1000, dtype=np.uint64)), np.uint64(0))
    x = to_unit(w)
    assert x.min() >= 0 and x.max() < 1
    assert abs(x.mean() - 0.5) < 0.05


def test_enumerate_small():
    plans = list(enumerate_splits(4, 2))
    assert [tuple(sorted(p.test_set)) for p in plans] == [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
    full = list(enumerate_splits(4, 4))
    assert len(full) == 1 and full[0].train_set == frozenset()
    with pytest.raises(InvalidArgumentError):
        list(enumerate_splits(4, 0))


def test_enumerate_cap_names_count():
    with pytest.raises(ResourceLimitError, match="C\\(30,15\\)"):
        list(enumerate_splits(30, 15))


@pytest.mark.parametrize("n,u", [(5, 2), (6, 3), (7, 1)])
def test_all_masks_match_enumeration(n, u):
    masks = all_masks(n, u)
    assert masks.shape == (math.comb(n, u), n)
    got = [tuple(np.flatnonzero(m) + 1) for m in masks]
    assert got == [tuple(sorted(p.test_set)) for p in enumerate_splits(n, u)]


def test_perturb_coordinate():
    d = DrawVector(3, (3, 2))
    assert perturb_coordinate(d, 2, 3).entries == (3, 3)
    assert d.entries == (3, 2)
    same = DrawVector(3, (1, 2, 3))
    assert perturb_coordinate(same, 1, 1) == same
    with pytest.raises(InvalidArgumentError):
        perturb_coordinate(d, 1, 0)
    with pytest.raises(InvalidArgumentError):
        perturb_coordinate(d, 3, 3)


def test_split_plan_invariants():
    plan = SplitPlan(6, (4, 1, 6))
    assert plan.u == 3 and plan.m == 3
    assert plan.test_set | plan.train_set == set(range(1, 7))
    assert not plan.test_set & plan.train_set
    with pytest.raises(InvalidArgumentError):
        SplitPlan(3, (1, 1))


def test_index_csv_round_trip():
    assert format_indices([5, 2, 9]) == "2;5;9"
    assert parse_indices("2;5;9") == (2, 5, 9)
    assert parse_indices("") == ()


@given(st.integers(1, 12).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(0, 10**6), min_size=1, max_size=n))))
def test_randperm_prefix_is_a_partial_permutation(args):
    n, raw = args
    draws = [i + r % (n - i + 1) for i, r in enumerate(raw, start=1)]
    z = run_randperm(n, draws)
    assert len(set(z)) == len(z)
    assert z == trace_swaps(n, draws)


@settings(max_examples=200)
@given(st.integers(2, 7).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n), st.data())))
def test_perturbation_changes_at_most_one_element(args):
    n, u, data = args
    d = DrawVector(n, tuple(data.draw(st.integers(i, n)) for i in range(1, u + 1)))
    i = data.draw(st.integers(1, u))
    new = data.draw(st.integers(i, n))
    a = split_from_draws(d).test_set
    b = split_from_draws(perturb_coordinate(d, i, new)).test_set
    assert len(a - b) <= 1 and len(b - a) <= 1


@pytest.mark.parametrize("n,u", [(4, 2), (5, 3), (6, 2), (7, 2)])
def test_prefix_uniformity_chi_square(n, u):
    trials = 100_000
    masks = sampled_masks(n, u, 99, 0, trials)
    keys = Counter(map(bytes, np.packbits(masks, axis=1)))
    assert len(keys) == math.comb(n, u)
    counts = np.array(list(keys.values()))
    assert stats.chisquare(counts).pvalue > 0.001


def test_monte_carlo_matches_enumeration_for_a_statistic():
    n, u = 6, 3
    weights = np.array([0.3, 1.0, -2.0, 0.5, 4.0, 0.0])
    stat = lambda masks: (masks @ weights) ** 2  # noqa: E731
    exact = stat(all_masks(n, u)).mean()
    mc = stat(sampled_masks(n, u, 5, 0, 100_000))
    assert abs(mc.mean() - exact) <= 4 * mc.std(ddof=1) / math.sqrt(mc.size)


def test_ordered_prefixes_of_length_two():
    seqs = batch_test_sequences(5, batch_draws(5, 2, 3, np.arange(20_000, dtype=np.uint64)))
    pairs = Counter(map(tuple, seqs))
    assert set(pairs) == set(itertools.permutations(range(5), 2))
