"""Brute-force reference implementations used only by the tests."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction


def brute_reduction(n, edges):
    """Keep (u, v) iff no simple path of length >= 2 leads from u to v."""
    succ = {u: set() for u in range(n)}
    for u, v in edges:
        succ[u].add(v)

    def long_path(u, v):
        # enumerate simple paths u -> ... -> v avoiding the direct edge first hop
        stack = [(w, 1, {u, w}) for w in succ[u] if w != v]
        while stack:
            x, length, seen = stack.pop()
            for y in succ[x]:
                if y == v:
                    return True
                if y not in seen:
                    stack.append((y, length + 1, seen | {y}))
        return False

    return {(u, v) for u, v in edges if not long_path(u, v)}


def brute_closure(n, edges):
    reach = [[False] * n for _ in range(n)]
    for u, v in edges:
        reach[u][v] = True
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                for j in range(n):
                    if reach[k][j]:
                        reach[i][j] = True
    return reach


def brute_width(n, edges):
    reach = brute_closure(n, edges)
    best = 0
    for mask in range(1 << n):
        vs = [i for i in range(n) if mask >> i & 1]
        if len(vs) <= best:
            continue
        if all(not reach[a][b] and not reach[b][a] for a, b in itertools.combinations(vs, 2)):
            best = len(vs)
    return best


def random_dag(n, p, rng: random.Random):
    perm = list(range(n))
    rng.shuffle(perm)
    return [(perm[i], perm[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < p]


def brute_stripes(ranked_colors):
    """Iterated source removal on the complete bipartite DAG given colors in rank order."""
    n = len(ranked_colors)
    edges = {(i, j) for i in range(n) for j in range(i + 1, n) if ranked_colors[i] != ranked_colors[j]}
    alive = set(range(n))
    sizes = []
    while alive:
        sources = {v for v in alive if not any((u, v) in edges for u in alive)}
        sizes.append(len(sources))
        alive -= sources
    return sizes


def brute_average_ranks(n, edges):
    """Exact mean 1-based rank over all linear extensions, by permutation enumeration."""
    total = [0] * n
    count = 0
    for perm in itertools.permutations(range(n)):
        pos = {v: i for i, v in enumerate(perm)}
        if all(pos[u] < pos[v] for u, v in edges):
            count += 1
            for v in range(n):
                total[v] += pos[v] + 1
    return [Fraction(t, count) for t in total]


def merge_sort_count(items, less):
    """Reference top-down merge sort; returns (sorted, comparisons)."""
    count = 0

    def rec(xs):
        nonlocal count
        if len(xs) <= 1:
            return list(xs)
        mid = len(xs) // 2
        a, b = rec(xs[:mid]), rec(xs[mid:])
        out = []
        i = j = 0
        while i < len(a) and j < len(b):
            count += 1
            if less(a[i], b[j]):
                out.append(a[i]); i += 1
            else:
                out.append(b[j]); j += 1
        return out + a[i:] + b[j:]

    return rec(list(items)), count


def gk_case_costs(n):
    """Simulate both deterministic strategies on each of the n max-finding cases.

    Returns (probe_costs, skip_costs, proof_costs) lists indexed by case.
    """
    from pricedsort.core import OracleSession
    from pricedsort.generators import generate_instance

    probe, skip, proof = [], [], []
    for case in range(n):
        # n equally likely cases need n - 1 blues, so n + 1 elements
        inst = generate_instance("gk", {"n": n + 1, "case": case, "cost": n}, 0)
        s = OracleSession(inst)
        s.probe(0, 1)
        probe.append(s.total)
        s = OracleSession(inst)
        for b in range(2, n + 1):
            if s.probe(1, b):  # blue above red 2: the special one
                break
        skip.append(s.total)
        proof.append(n if case == 0 else 1)
    return probe, skip, proof


def all_window_partitions(k):
    """Every set of non-overlapping inclusive windows over k stripes."""
    def rec(i):
        if i >= k:
            yield []
            return
        yield from rec(i + 1)
        for j in range(i, k):
            for rest in rec(j + 1):
                yield [(i, j)] + rest
    yield from rec(0)
