import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from pricedsort.bounds import (
    INF,
    TooLarge,
    all_size_vectors,
    brute_force_opt,
    decomposition_lb,
    decomposition_lb_sizes,
    gk_expected_ratios,
    inversion_lb,
    lower_bound_report,
    neighborhood,
    verification_lb,
    window_estimate,
)
from pricedsort.core import ground_truth_reduction, instance_from_colors
from pricedsort.generators import colors_from_sizes

from oracles import all_window_partitions, gk_case_costs


def inst(sizes, ids=None):
    return instance_from_colors(colors_from_sizes(sizes), ids=ids)


def test_verification_examples():
    assert verification_lb(inst([3, 5])) == 15
    assert verification_lb(inst([1, 1, 1])) == 2
    assert verification_lb(inst([2, 3, 1])) == 9


@given(st.lists(st.integers(1, 4), min_size=1, max_size=6))
def test_verification_is_reduction_size(sizes):
    i = inst(sizes)
    assert verification_lb(i) == len(ground_truth_reduction(i))


def test_inversion_examples():
    assert inversion_lb(inst([1, 1, 1, 1])) == 4
    assert inversion_lb(inst([3, 4])) == INF
    # r b b r: each color sees half the pairs inverted
    assert inversion_lb(instance_from_colors("RBBR")) == 2


@given(st.lists(st.integers(1, 3), min_size=2, max_size=6), st.integers(0, 10**6))
def test_inversion_invariant_under_relabeling(sizes, seed):
    n = sum(sizes)
    ids = list(range(n))
    random.Random(seed).shuffle(ids)
    assert inversion_lb(inst(sizes)) == inversion_lb(inst(sizes, ids))


@given(st.lists(st.integers(1, 5), min_size=1, max_size=8), st.booleans())
def test_decomposition_is_optimal(sizes, red_first):
    colors = [("R" if (i % 2 == 0) == red_first else "B") for i in range(len(sizes))]
    value, windows = decomposition_lb_sizes(sizes, colors)
    brute = max(sum((window_estimate(sizes, colors, a, b) for a, b in part), Fraction(0))
                for part in all_window_partitions(len(sizes)))
    assert value == brute
    assert value >= window_estimate(sizes, colors, 0, len(sizes) - 1)
    assert all(b1 < a2 for (_, b1), (a2, _) in zip(windows, windows[1:]))


def test_decomposition_far_apart_blocks():
    sizes = [10, 10, 1, 1, 1, 10, 10]
    value, windows = decomposition_lb(inst(sizes))
    assert value >= Fraction(200, 32)


def test_decomposition_interleaved_linear():
    for n in (64, 256, 1024):
        value, _ = decomposition_lb(instance_from_colors("RB" * n))
        assert value >= Fraction(2 * n, 64)


def test_report_row():
    row = lower_bound_report(inst([2, 2])).to_row()
    assert row["c_v"] == 4 and row["c_i"] == "inf" and row["windows"] == "0-1"


def test_brute_force_examples():
    assert brute_force_opt(instance_from_colors("RB")).cost == 1
    assert brute_force_opt(inst([2, 2])).cost == 4
    res = brute_force_opt(instance_from_colors("RBRB"), "N_A")
    assert 2 <= res.cost <= 4


def test_neighborhood_contains_instance_and_is_acyclic():
    i = inst([1, 2, 1])
    na, nae = neighborhood(i, "N_A"), neighborhood(i, "N_AE")
    assert na <= nae and len(nae) > len(na)


def test_brute_force_size_cap():
    with pytest.raises(TooLarge):
        brute_force_opt(inst([4, 3]))


def test_lower_bounds_consistent_with_opt():
    for sizes in all_size_vectors(5):
        i = inst(sizes)
        opt = brute_force_opt(i).cost
        assert opt >= Fraction(verification_lb(i), 2) - 1
        ci = inversion_lb(i)
        if ci != INF:
            assert opt >= ci / 2 - 1


def test_size_vector_enumeration():
    vecs = list(all_size_vectors(6))
    assert len(vecs) == sum(2 ** (t - 1) - 1 for t in range(2, 7))
    assert all(len(v) >= 2 and sum(v) <= 6 for v in vecs)


def test_gk_pinned_values():
    assert gk_expected_ratios(4) == (Fraction(13, 4), Fraction(9, 4))


@pytest.mark.parametrize("n", [4, 5, 8])
def test_gk_matches_simulated_cases(n):
    probe, skip, proof = gk_case_costs(n)
    probe_ratio, skip_ratio = gk_expected_ratios(n)
    assert sum(Fraction(c) / p for c, p in zip(probe, proof)) / n == probe_ratio
    assert sum(skip, Fraction(0)) / n == skip_ratio
    assert sorted(skip) == list(range(1, n)) + [n - 1]


def test_gk_linear_growth():
    for n in range(3, 65):
        assert min(gk_expected_ratios(n)) >= Fraction(n, 2) - 1
