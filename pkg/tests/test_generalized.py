import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pricedsort.core import FourLevel, Instance, OracleSession, RevealedDag, dag_width, transitive_reduction
from pricedsort.generalized import (
    ExtensionSampler,
    NoHamiltonian,
    PipelineConfig,
    allowed_classes,
    average_ranks,
    complete_hamiltonian,
    exact_average_ranks,
    hamiltonian_profile,
    interleave,
    is_hamiltonian_reduction,
    predecessor_search,
    sort_four_costs,
    universal_sort_01,
)
from pricedsort.generators import generate_instance

from oracles import brute_average_ranks, brute_reduction, random_dag


def all_ones(n, rng, F=None):
    order = list(range(n))
    rng.shuffle(order)
    pairs = {(a, b): 1 for a in range(n) for b in range(a + 1, n)}
    F = F if F is not None else math.ceil(n**0.75) + 1
    return Instance(n, tuple(order), "R" * n, FourLevel(F, pairs), True)


def chained_dag(inst, w, rng, exclude, cross=0.0):
    """Width <= w sub-DAG of the hidden order built from w random chains."""
    members = [x for x in inst.order if x != exclude]
    label = {x: rng.randrange(w) for x in members}
    edges = set()
    last = {}
    for x in members:
        c = label[x]
        if c in last:
            edges.add((last[c], x))
        last[c] = x
    for i, a in enumerate(members):
        for b in members[i + 1:]:
            if rng.random() < cross:
                edges.add((a, b))
    return RevealedDag(inst.n, edges)


def brute_predecessors(inst, dag, v):
    rank = inst.rank
    edges = set(dag.edges)
    for u in range(inst.n):
        if u != v:
            edges.add((u, v) if rank[u] < rank[v] else (v, u))
    return {u for u, x in brute_reduction(inst.n, edges) if x == v}


# ---------------------------------------------------------------- predecessor search


def test_single_chain_above_all():
    rng = random.Random(0)
    inst = all_ones(8, rng)
    v = inst.order[-1]
    chain = list(inst.order[:-1])
    dag = RevealedDag(8, list(zip(chain, chain[1:])))
    session = OracleSession(inst)
    assert predecessor_search(dag, v, session) == {chain[-1]}
    assert session.probes <= 3


def test_disjoint_chains_v_on_top():
    rng = random.Random(1)
    for w in (1, 2, 3, 5):
        inst = all_ones(31, rng)
        v = inst.order[-1]
        members = list(inst.order[:-1])
        chains = [members[i::w] for i in range(w)]
        dag = RevealedDag(31, [(c[i], c[i + 1]) for c in chains for i in range(len(c) - 1)])
        assert predecessor_search(dag, v, OracleSession(inst)) == {c[-1] for c in chains}


def test_v_below_everything():
    rng = random.Random(2)
    inst = all_ones(20, rng)
    v = inst.order[0]
    dag = chained_dag(inst, 3, rng, v)
    assert predecessor_search(dag, v, OracleSession(inst)) == set()


@settings(max_examples=200)
@given(st.integers(2, 200), st.integers(1, 5), st.integers(0, 10**6), st.sampled_from([0.0, 0.01, 0.1]))
def test_predecessor_search_budget_and_answer(n, w, seed, cross):
    rng = random.Random(seed)
    inst = all_ones(n, rng)
    v = rng.randrange(n)
    dag = chained_dag(inst, w, rng, v, cross)
    width = dag_width(dag, [x for x in range(n) if x != v])
    expected = brute_predecessors(inst, dag, v) if n <= 40 else None
    session = OracleSession(inst)
    found = predecessor_search(dag, v, session)
    assert session.probes <= width * math.ceil(math.log2(n + 1))
    assert len(found) <= width
    if expected is not None:
        assert found == expected


# ---------------------------------------------------------------- Hamiltonian completion


def test_complete_hamiltonian_no_work_when_already_a_path():
    inst = all_ones(10, random.Random(3))
    dag = RevealedDag(10, list(zip(inst.order, inst.order[1:])))
    session = OracleSession(inst)
    res = complete_hamiltonian(dag, session)
    assert res.path == list(inst.order) and res.probes == 0 and res.k == 0


def test_two_chains_missing_one_edge():
    for seed in range(20):
        rng = random.Random(seed)
        n = 64
        inst = all_ones(n, rng)
        cut = rng.randrange(1, n - 1)
        order = inst.order
        edges = list(zip(order[:cut], order[1:cut])) + list(zip(order[cut:], order[cut + 1:]))
        session = OracleSession(inst)
        res = complete_hamiltonian(RevealedDag(n, edges), session)
        assert res.path == list(order)
        assert res.k == 1 and res.width == 2
        assert res.probes <= 2 * 2 * math.ceil(math.log2(n))


@pytest.mark.parametrize("k", [1, 2, 4, 8])
def test_completion_budget(k):
    rng = random.Random(k)
    for n in (64, 128):
        inst = all_ones(n, rng)
        order = inst.order
        missing = set(rng.sample(range(n - 1), k))
        edges = [(order[i], order[i + 1]) for i in range(n - 1) if i not in missing]
        res = complete_hamiltonian(RevealedDag(n, edges), OracleSession(inst))
        assert res.path == list(order)
        assert res.k == k and res.k + 1 >= res.width
        assert res.probes <= 4 * res.width * k * math.log2(n)


def test_completion_stalls_off_promise():
    # missing path edge is forbidden
    order = (0, 1, 2, 3)
    pairs = {(0, 1): 1, (2, 3): 1, (0, 2): 1, (0, 3): 1, (1, 3): 1}
    inst = Instance(4, order, "RRRR", FourLevel(4, pairs), False)
    dag = RevealedDag(4, [(0, 1), (2, 3)])
    with pytest.raises(NoHamiltonian):
        complete_hamiltonian(dag, OracleSession(inst), allowed_classes(inst, (0, 1, 2)))


# ---------------------------------------------------------------- average ranks


def test_exact_ranks_examples():
    # extensions abc, acb, cab
    est = exact_average_ranks(RevealedDag(3, [(0, 1)]))
    assert est.ranks == [Fraction(4, 3), Fraction(8, 3), Fraction(2)]
    assert est.mode == "Exact" and est.samples == 3
    assert exact_average_ranks(RevealedDag(5)).ranks == [Fraction(3)] * 5
    chain = RevealedDag(4, [(2, 0), (0, 3), (3, 1)])
    assert exact_average_ranks(chain).ranks == [2, 4, 1, 3]


@given(st.integers(1, 7), st.floats(0, 0.6), st.integers(0, 10**6))
def test_exact_ranks_match_enumeration(n, p, seed):
    edges = random_dag(n, p, random.Random(seed))
    est = exact_average_ranks(RevealedDag(n, edges))
    assert est.ranks == brute_average_ranks(n, edges)
    for u, v in edges:
        assert est.ranks[u] + 1 <= est.ranks[v]
        assert est.before[u, v] == 1.0


def test_sampled_ranks_converge():
    rng = random.Random(5)
    cfg = PipelineConfig(samples=100_000, exact_limit=0, thin=10, seed=3)
    for n in (6, 10):
        edges = random_dag(n, 0.2, rng)
        dag = RevealedDag(n, edges)
        exact = np.asarray([float(r) for r in exact_average_ranks(dag).ranks])
        est = average_ranks(dag, cfg)
        assert est.mode == "Sampled" and est.samples == 100_000
        assert np.max(np.abs(np.asarray(est.ranks) - exact)) <= 0.1


def test_sampler_warm_start_respects_new_edges():
    cfg = PipelineConfig(samples=50, reburn=10)
    sampler = ExtensionSampler(20, cfg)
    dag = RevealedDag(20)
    sampler.sample(dag)
    dag.add_edge(19, 0)
    dag.add_edge(5, 4)
    pos = sampler.sample(dag)
    assert (pos[:, 19] < pos[:, 0]).all() and (pos[:, 5] < pos[:, 4]).all()


# ---------------------------------------------------------------- universal sorting


def ground_g01(inst):
    rank = inst.rank
    return [(a, b) if rank[a] < rank[b] else (b, a) for (a, b), c in inst.cost_model.pair_class.items() if c <= 1]


@settings(max_examples=40)
@given(st.integers(2, 32), st.integers(0, 10**6))
def test_universal_sort_matches_brute_force(n, seed):
    inst = generate_instance("four_level", {"n": n, "k1": 1, "kF": 0, "p1": 0.2}, seed)
    res = universal_sort_01(OracleSession(inst))
    assert res.reduction == transitive_reduction(ground_g01(inst), n)


def test_universal_sort_all_zero():
    rng = random.Random(0)
    n = 12
    order = list(range(n))
    rng.shuffle(order)
    pairs = {(a, b): 0 for a in range(n) for b in range(a + 1, n)}
    inst = Instance(n, tuple(order), "R" * n, FourLevel(8, pairs), True)
    session = OracleSession(inst)
    res = universal_sort_01(session)
    assert session.probes == len(pairs) and session.total == 0
    assert is_hamiltonian_reduction(res.reduction, n) == order


def test_universal_sort_wide_fallback():
    # an antichain of 0-1 pairs: no relations are implied, every pair is probed
    n = 16
    order = list(range(n))
    pairs = {(a, b): 1 for a in range(n) for b in range(a + 1, n) if b - a > 1 or a % 2}
    inst = Instance(n, tuple(order), "R" * n, FourLevel(8, pairs), False)
    res = universal_sort_01(OracleSession(inst))
    assert res.reduction == transitive_reduction(ground_g01(inst), n)


# ---------------------------------------------------------------- dispatcher


def test_interleave_schedule():
    ok = {"status": "ok", "cost": Fraction(5), "trajectory": [Fraction(i) for i in range(1, 6)]}
    slow = {"status": "ok", "cost": Fraction(100), "trajectory": [Fraction(i) for i in range(1, 101)]}
    failed = {"status": "failed", "cost": Fraction(2), "trajectory": [Fraction(1), Fraction(2)]}
    win, total = interleave([slow, failed, ok])
    assert win == 2
    # phase caps 1, 2, 4, 8: slow reaches 8 before ok finishes at 5
    assert total == 8 + 2 + 5
    with pytest.raises(NoHamiltonian):
        interleave([failed])


def test_small_all_ones_sanity():
    inst = all_ones(4, random.Random(7), F=4)
    res = sort_four_costs(inst)
    assert res.path == list(inst.order)
    assert res.ratio <= 4 * 4  # interleaving overhead over the baseline


@pytest.mark.parametrize("k1,kF", [(1, 0), ("sqrt", 0), (0, 1), ("sqrt", 1), (2, 2)])
def test_sort_four_costs_correct(k1, kF):
    for seed in range(3):
        inst = generate_instance("four_level", {"n": 48, "k1": k1, "kF": kF}, seed)
        res = sort_four_costs(inst)
        assert res.path == list(inst.order)
        prof = hamiltonian_profile(inst)
        assert res.stats["k1"] == prof["k1"] and res.stats["winner"] == res.winner
        assert res.ratio == res.cost / (prof["k1"] + inst.cost_model.F * prof["kF"])


def test_sort_four_costs_rejects_small_F():
    inst = generate_instance("four_level", {"n": 64, "k1": 2, "kF": 0}, 0)
    with pytest.raises(ValueError):
        sort_four_costs(inst, PipelineConfig(F=Fraction(2)))


def test_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(samples=0)
    with pytest.raises(ValueError):
        PipelineConfig(balanced_low=0.7)
