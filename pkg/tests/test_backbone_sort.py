import math
import random

import pytest
from hypothesis import given, strategies as st

from pricedsort.backbone_sort import (
    PromiseViolated,
    initial_state,
    is_stuck,
    run_backbone_sort,
    run_round,
)
from pricedsort.core import OracleSession, instance_from_colors
from pricedsort.inversion_sort import HI, LO


def interleaved(n, seed, first="RB"):
    rng = random.Random(seed)
    ids = list(range(2 * n))
    rng.shuffle(ids)
    return instance_from_colors(first * n, ids=ids)


def test_two_elements_one_probe():
    for colors in ("RB", "BR"):
        order, stats = run_backbone_sort(instance_from_colors(colors))
        assert order == [0, 1] and stats.total_cost == 1


@given(st.integers(1, 60), st.integers(0, 10**6), st.sampled_from(["RB", "BR"]))
def test_sorts_interleaved(n, seed, first):
    inst = interleaved(n, seed, first)
    order, _ = run_backbone_sort(inst, seed=seed)
    assert order == list(inst.order)


def test_sorts_interleaved_large():
    for seed in range(5):
        inst = interleaved(2048, seed)
        order, stats = run_backbone_sort(inst, seed=seed, session=OracleSession(inst, record_pairs=False))
        assert order == list(inst.order)
        assert stats.total_cost <= 4 * 4096 * math.log2(4096)


def test_phases_alternate_and_one_pivot_per_bucket():
    inst = interleaved(40, 3)
    session = OracleSession(inst)
    rng = random.Random(1)
    state = initial_state(inst)
    while not state.done:
        phase = state.phase
        live = sum(1 for i, b in enumerate(state.backbone.buckets) if b and state.backbone.color_at(i) == phase)
        reps_before = len(state.backbone.reps)
        state = run_round(state, session, rng)
        assert state.phase != phase
        # on-promise every pivot lands, two new reps each (or replaces an artificial extreme)
        grown = len(state.backbone.reps) - reps_before
        assert grown <= 2 * live


def test_probes_per_applied_pivot():
    # first round: one red pivot against all 10 blues, then the new blue rep
    # (if the pivot landed) against the 9 remaining reds
    inst = interleaved(10, 0)
    for seed in range(20):
        session = OracleSession(inst)
        state = run_round(initial_state(inst), session, random.Random(seed))
        landed = LO in state.backbone.reps
        assert session.probes == (10 + 9 if landed else 10)


def test_blue_bucket_probed_by_both_neighbor_pivots():
    inst = interleaved(300, 1)
    session = OracleSession(inst)
    rng = random.Random(2)
    state = initial_state(inst)
    for _ in range(100):
        assert not state.done, "no bucket with two live neighbors ever appeared"
        state = run_round(state, session, rng)
        bb = state.backbone
        target = [j for j in range(1, len(bb.reps) - 1)
                  if bb.color_at(j) == "B" and bb.buckets[j] and bb.buckets[j - 1] and bb.buckets[j + 1]]
        if state.phase == "R" and target:
            break
    j = target[0]
    k = len(state.backbone.buckets[j])
    before = session.probes
    live_blue = sum(len(b) for i, b in enumerate(state.backbone.buckets) if state.backbone.color_at(i) == "B")
    run_round(state, session, rng)
    # every blue element is probed once per applicable pivot, so bucket j alone contributes 2k
    assert session.probes - before >= 2 * k
    assert session.probes - before >= live_blue


def test_round_count_logarithmic():
    rounds = []
    for seed in range(20):
        inst = interleaved(2048, seed)
        _, stats = run_backbone_sort(inst, seed=seed, session=OracleSession(inst, record_pairs=False))
        rounds.append(stats.rounds)
    assert max(rounds) <= 4 * math.log2(4096)


def balloon(n):
    k = math.isqrt(n)
    return instance_from_colors("R" * (n - k) + "BR" * k + "B" * (n - k))


def test_balloon_reports_promise_violation_with_cost():
    inst = balloon(64)
    with pytest.raises(PromiseViolated) as info:
        run_backbone_sort(inst, seed=0)
    assert info.value.cost > 0 and info.value.rounds > 0


def test_round_cap():
    with pytest.raises(PromiseViolated, match="round cap"):
        run_backbone_sort(interleaved(50, 0), seed=0, round_cap=2)


def test_stuck_detection():
    inst = instance_from_colors("RRB")
    state = initial_state(inst)
    assert not is_stuck(state)
    with pytest.raises(PromiseViolated, match="cannot shrink"):
        run_backbone_sort(inst, seed=0)


def test_artificial_rep_replaced_by_extreme():
    inst = instance_from_colors("RB")
    state = run_round(initial_state(inst), OracleSession(inst), random.Random(0))
    assert state.backbone.reps == [0, HI]
    assert LO not in state.backbone.reps
