"""Sorting with costs in {0, 1, F, inf}.

Building blocks: predecessor search by per-chain binary search, Hamiltonian
completion by repeated predecessor search, average ranks over linear
extensions, and a universal-sorting loop that reveals the 0-1 DAG.  The
top-level ``sort_four_costs`` races four strategies under a doubling budget
schedule.
"""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numba import njit

from .core import (
    FourLevel,
    Instance,
    OracleSession,
    RevealedDag,
    chain_decomposition,
    dag_width,
    transitive_reduction,
)


class NoHamiltonian(RuntimeError):
    """Hamiltonian completion stalled: the promise does not hold."""


class BudgetExceeded(RuntimeError):
    pass


# --------------------------------------------------------------------------
# configuration


@dataclass
class PipelineConfig:
    F: Fraction | None = None  # overrides the instance's F when set
    abort_factor: float = 1.0  # zero-then-search branch stops at this * n^1.5 log2 n
    exact_limit: int = 12  # exact average ranks up to this many vertices
    samples: int = 200
    burn_in: int | None = None  # cold start; None means min(10 n^3, burn_cap)
    burn_cap: int = 2_000_000
    reburn: int | None = None  # warm restarts; None means 4 n^2
    thin: int | None = None  # chain steps between samples; None means n
    balanced_low: float = 1 / 3
    active_factor: float = 4.0  # active in-degree bound is this * sqrt(n) log2 n
    seed: int = 0

    def __post_init__(self):
        if self.samples < 1 or self.abort_factor <= 0 or self.active_factor <= 0:
            raise ValueError("thresholds must be positive")
        if not 0 < self.balanced_low <= 0.5:
            raise ValueError("balanced_low must lie in (0, 1/2]")

    def abort_threshold(self, n: int) -> float:
        return self.abort_factor * n**1.5 * max(1.0, math.log2(n))

    def active_threshold(self, n: int) -> float:
        return self.active_factor * math.sqrt(n) * max(1.0, math.log2(n))


def allowed_classes(instance: Instance, classes) -> callable:
    klass, classes = instance.cost_model.klass, frozenset(classes)
    return lambda u, v: klass(instance, u, v) in classes


def closure_matrix(dag: RevealedDag) -> np.ndarray:
    """Boolean reach[u, v] for a nonempty path u -> v."""
    n = dag.n
    nbytes = (n + 7) // 8
    buf = b"".join(r.to_bytes(nbytes, "little") for r in dag.closure())
    bits = np.unpackbits(np.frombuffer(buf, dtype=np.uint8).reshape(n, nbytes), axis=1, bitorder="little")
    return bits[:, :n].astype(bool)


# --------------------------------------------------------------------------
# predecessor search and Hamiltonian completion


def predecessor_search(dag: RevealedDag, v: int, session: OracleSession, allowed=None,
                       candidates=None, chains=None) -> set[int]:
    """Predecessors of v in the reduction once v's relations to the candidates are known.

    One binary search per chain of a minimum chain cover, restricted to chain
    elements whose relation to v is already implied or probeable.  Probe
    results are added to ``dag``.  At most w * ceil(log2(n + 1)) probes.
    """
    if chains is None:
        pool = [x for x in (range(dag.n) if candidates is None else candidates) if x != v]
        chains = chain_decomposition(dag, pool)
    else:
        chains = [[x for x in c if x != v] for c in chains]
    if allowed is None:
        allowed = allowed_classes(session.instance, range(len(session.instance.cost_model.classes)))
    found = []
    for chain in chains:
        det = [x for x in chain if dag.known(x, v) or allowed(x, v)]
        lo, hi = -1, len(det)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            x = det[mid]
            if dag.reaches(x, v):
                below = True
            elif dag.reaches(v, x):
                below = False
            else:
                below = session.probe(x, v)
                if below:
                    dag.add_edge(x, v)
                else:
                    dag.add_edge(v, x)
            if below:
                lo = mid
            else:
                hi = mid
        if lo >= 0:
            found.append(det[lo])
    return {u for u in found if not any(t != u and dag.reaches(u, t) for t in found)}


def kahn_layers(dag: RevealedDag) -> list[list[int]]:
    indeg = [0] * dag.n
    for u in range(dag.n):
        for w in dag.succ[u]:
            indeg[w] += 1
    layer = sorted(u for u in range(dag.n) if indeg[u] == 0)
    layers = []
    while layer:
        layers.append(layer)
        nxt = []
        for u in layer:
            for w in dag.succ[u]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    nxt.append(w)
        layer = sorted(nxt)
    return layers


@dataclass
class HamiltonianResult:
    path: list
    probes: int
    cost: Fraction
    k: int  # Hamiltonian edges not implied by the starting DAG
    width: int  # width of the starting DAG
    rounds: int


def complete_hamiltonian(partial: RevealedDag, session: OracleSession, allowed=None) -> HamiltonianResult:
    """Turn a sub-DAG of a Hamiltonian DAG into the Hamiltonian path."""
    dag = RevealedDag(partial.n, partial.edges)
    start = list(dag.closure())
    width = dag_width(dag) if dag.n else 0
    probes0, cost0 = session.probes, session.total
    rounds = 0
    while True:
        layers = kahn_layers(dag)
        if sum(map(len, layers)) != dag.n:
            raise NoHamiltonian("cycle in revealed relations")
        wide = next((layer for layer in layers if len(layer) >= 2), None)
        if wide is None:
            path = [layer[0] for layer in layers]
            break
        rounds += 1
        known_before = sum(bin(r).count("1") for r in dag.closure())
        chains = chain_decomposition(dag)
        for v in wide:
            predecessor_search(dag, v, session, allowed, chains=chains)
        if sum(bin(r).count("1") for r in dag.closure()) == known_before:
            raise NoHamiltonian(f"no progress on antichain {wide}")
    k = sum(1 for a, b in zip(path, path[1:]) if not (start[a] >> b) & 1)
    return HamiltonianResult(path, session.probes - probes0, session.total - cost0, k, width, rounds)


# --------------------------------------------------------------------------
# average ranks


@dataclass
class RankEstimate:
    ranks: list  # 1-based mean positions; Fractions in exact mode
    mode: str  # "Exact" or "Sampled"
    samples: int
    before: np.ndarray  # before[u, v] = P(u precedes v)

    def as_floats(self) -> np.ndarray:
        return np.asarray([float(r) for r in self.ranks])


def exact_average_ranks(dag: RevealedDag) -> RankEstimate:
    """Exact ranks and precedence probabilities by dynamic programming over downsets."""
    n = dag.n
    pred = [0] * n
    for u in range(n):
        for w in dag.succ[u]:
            pred[w] |= 1 << u
    full = (1 << n) - 1
    ways_in = {0: 1}  # linearizations of a downset
    frontier = [0]
    levels = [[0]]
    for _ in range(n):
        nxt = {}
        for D in frontier:
            c = ways_in[D]
            for v in range(n):
                if not (D >> v) & 1 and pred[v] & D == pred[v]:
                    E = D | (1 << v)
                    nxt[E] = nxt.get(E, 0) + c
        ways_in.update(nxt)
        frontier = list(nxt)
        levels.append(frontier)
    ways_out = {full: 1}  # linearizations of the complement
    for level in reversed(levels[:-1]):
        for D in level:
            total = 0
            for v in range(n):
                if not (D >> v) & 1 and pred[v] & D == pred[v]:
                    total += ways_out[D | (1 << v)]
            ways_out[D] = total
    count = ways_in[full]
    rank_sum = [0] * n
    before = [[0] * n for _ in range(n)]
    for D, c_in in ways_in.items():
        if D == full:
            continue
        size = bin(D).count("1")
        members = [u for u in range(n) if (D >> u) & 1]
        for v in range(n):
            if not (D >> v) & 1 and pred[v] & D == pred[v]:
                c = c_in * ways_out[D | (1 << v)]
                rank_sum[v] += (size + 1) * c
                for u in members:
                    before[u][v] += c
    ranks = [Fraction(s, count) for s in rank_sum]
    prob = np.asarray(before, dtype=float) / count
    return RankEstimate(ranks, "Exact", count, prob)


@njit(cache=True)
def _mcmc(perm, reach, burn, n_samples, thin, seed):
    np.random.seed(seed)
    n = perm.size
    out = np.empty((n_samples, n), np.int32)
    for _ in range(burn):
        i = np.random.randint(0, n - 1)
        if np.random.random() < 0.5:
            a = perm[i]
            b = perm[i + 1]
            if not reach[a, b]:
                perm[i] = b
                perm[i + 1] = a
    for s in range(n_samples):
        for _ in range(thin):
            i = np.random.randint(0, n - 1)
            if np.random.random() < 0.5:
                a = perm[i]
                b = perm[i + 1]
                if not reach[a, b]:
                    perm[i] = b
                    perm[i + 1] = a
        for i in range(n):
            out[s, perm[i]] = i
    return out


class ExtensionSampler:
    """Adjacent-transposition chain over linear extensions, warm-started across calls."""

    def __init__(self, n: int, config: PipelineConfig):
        self.n = n
        self.config = config
        self.perm: np.ndarray | None = None
        self.calls = 0

    def _repair(self, dag: RevealedDag) -> None:
        # topological order that keeps the current permutation where possible
        import heapq

        pos = np.empty(self.n, dtype=np.int64)
        pos[self.perm] = np.arange(self.n)
        indeg = [0] * self.n
        for u in range(self.n):
            for w in dag.succ[u]:
                indeg[w] += 1
        heap = [(int(pos[u]), u) for u in range(self.n) if indeg[u] == 0]
        heapq.heapify(heap)
        out = []
        while heap:
            _, u = heapq.heappop(heap)
            out.append(u)
            for w in dag.succ[u]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    heapq.heappush(heap, (int(pos[w]), w))
        self.perm = np.asarray(out, dtype=np.int64)

    def sample(self, dag: RevealedDag, samples: int | None = None) -> np.ndarray:
        n, cfg = self.n, self.config
        reach = closure_matrix(dag)
        if self.perm is None:
            self.perm = np.asarray(dag.topological_order(), dtype=np.int64)
            burn = cfg.burn_in if cfg.burn_in is not None else min(10 * n**3, cfg.burn_cap)
        else:
            self._repair(dag)
            burn = cfg.reburn if cfg.reburn is not None else 4 * n * n
        thin = cfg.thin if cfg.thin is not None else n
        seed = (cfg.seed * 1_000_003 + self.calls) % (2**31)
        self.calls += 1
        return _mcmc(self.perm, reach, burn, samples or cfg.samples, thin, seed)


def average_ranks(dag: RevealedDag, config: PipelineConfig | None = None,
                  sampler: ExtensionSampler | None = None, mode: str | None = None) -> RankEstimate:
    config = config or PipelineConfig()
    n = dag.n
    if mode == "Exact" or (mode is None and n <= config.exact_limit):
        return exact_average_ranks(dag)
    if n < 2:
        return RankEstimate([1.0] * n, "Sampled", config.samples, np.zeros((n, n)))
    sampler = sampler or ExtensionSampler(n, config)
    pos = sampler.sample(dag)
    ranks = (pos.mean(axis=0) + 1).tolist()
    before = (pos[:, :, None] < pos[:, None, :]).mean(axis=0)
    return RankEstimate(ranks, "Sampled", pos.shape[0], before)


# --------------------------------------------------------------------------
# universal sorting of the 0-1 DAG


@dataclass
class UniversalResult:
    reduction: set
    dag: RevealedDag
    cost: Fraction
    probes: int
    steps: dict = field(default_factory=dict)


def _class_matrix(instance: Instance) -> np.ndarray:
    n = instance.n
    cls = np.full((n, n), -1, dtype=np.int8)
    cm = instance.cost_model
    if isinstance(cm, FourLevel):
        for (a, b), c in cm.pair_class.items():
            cls[a, b] = cls[b, a] = c
    else:
        for a in range(n):
            for b in range(a + 1, n):
                cls[a, b] = cls[b, a] = cm.klass(instance, a, b)
    return cls


def universal_sort(session: OracleSession, config: PipelineConfig | None = None,
                   classes=(0, 1)) -> UniversalResult:
    """Reveal every pair of the given cost classes, by probe or implication.

    Returns the transitive reduction of the DAG on those pairs.  Cost-0 pairs
    are probed first; then each iteration probes balanced pairs, else free
    pairs into active vertices, else resolves a low-rank live set and searches
    every other live vertex into it.
    """
    config = config or PipelineConfig()
    inst = session.instance
    n = inst.n
    cls = _class_matrix(inst)
    allowed_mask = np.isin(cls, list(classes))
    np.fill_diagonal(allowed_mask, False)
    upper = np.triu(allowed_mask, 1)
    allowed = lambda u, v: bool(allowed_mask[u, v])  # noqa: E731
    dag = RevealedDag(n)
    dag.closure()
    steps = {"zero": 0, "balanced": 0, "free": 0, "search": 0, "fallback": 0, "iterations": 0}
    probes0, cost0 = session.probes, session.total
    rng = random.Random(config.seed)

    def probe(u: int, v: int) -> bool:
        if dag.known(u, v):
            return False
        if session.probe(u, v):
            dag.add_edge(u, v)
        else:
            dag.add_edge(v, u)
        return True

    if 0 in classes:
        # free, so every one is probed even when already implied
        for a, b in zip(*np.nonzero(np.triu(cls == 0, 1))):
            a, b = int(a), int(b)
            below = session.probe(a, b)
            if not dag.known(a, b):
                dag.add_edge(*((a, b) if below else (b, a)))
            steps["zero"] += 1

    sampler = ExtensionSampler(n, config)
    while True:
        reach = closure_matrix(dag)
        unresolved = upper & ~(reach | reach.T)
        us, vs = np.nonzero(unresolved)
        if us.size == 0:
            break
        steps["iterations"] += 1
        est = average_ranks(dag, config, sampler)
        p = est.before[us, vs]
        lo = config.balanced_low
        balanced = np.flatnonzero((p >= lo) & (p <= 1 - lo))
        made = 0
        if balanced.size:
            used = set()
            for idx in balanced[np.argsort(np.abs(p[balanced] - 0.5), kind="stable")]:
                u, v = int(us[idx]), int(vs[idx])
                if u in used or v in used:
                    continue
                used.update((u, v))
                made += probe(u, v)
            steps["balanced"] += made
            if made:
                continue
        r = est.as_floats()
        head = np.where(r[us] <= r[vs], vs, us)
        tail = np.where(r[us] <= r[vs], us, vs)
        indeg = np.bincount(head, minlength=n)
        free = np.flatnonzero(indeg[head] <= config.active_threshold(n))
        if free.size:
            gap = np.abs(r[head[free]] - r[tail[free]])
            for idx in free[np.argsort(gap, kind="stable")]:
                made += probe(int(tail[idx]), int(head[idx]))
            steps["free"] += made
            if made:
                continue
        made = _search_step(dag, session, allowed, unresolved, r, n, probe)
        steps["search"] += made
        if not made:
            u, v = int(us[0]), int(vs[0])
            k = rng.randrange(us.size)
            u, v = int(us[k]), int(vs[k])
            steps["fallback"] += probe(u, v)
    return UniversalResult(transitive_reduction(dag), dag, session.total - cost0, session.probes - probes0, steps)


def _search_step(dag, session, allowed, unresolved, ranks, n, probe) -> int:
    """Resolve the sqrt(n) lowest-rank live vertices, then search the other live vertices into them."""
    live_mask = unresolved.any(axis=0) | unresolved.any(axis=1)
    live = [int(x) for x in np.flatnonzero(live_mask)]
    if not live:
        return 0
    live.sort(key=lambda x: (ranks[x], x))
    size = max(1, math.isqrt(n))
    S = live[:size]
    before = session.probes
    for i, a in enumerate(S):
        for b in S[i + 1:]:
            if unresolved[min(a, b), max(a, b)] and not dag.known(a, b):
                probe(a, b)
    if dag_width(dag, S) >= math.sqrt(n) / 4:
        # the known order on S certifies a wide DAG: probe everything left
        us, vs = np.nonzero(unresolved)
        for u, v in zip(us.tolist(), vs.tolist()):
            probe(u, v)
        return session.probes - before
    chains = chain_decomposition(dag, S)
    for v in live[size:]:
        predecessor_search(dag, v, session, allowed, chains=chains)
    return session.probes - before


def universal_sort_01(session: OracleSession, config: PipelineConfig | None = None) -> UniversalResult:
    """Transitive reduction of the DAG of all cost-0 and cost-1 pairs."""
    return universal_sort(session, config, classes=(0, 1))


# --------------------------------------------------------------------------
# the four-branch dispatcher


class RecordingSession(OracleSession):
    """Session that keeps the running total after every probe and enforces a budget."""

    def __init__(self, instance: Instance, budget: float | None = None):
        super().__init__(instance)
        self.trajectory: list[Fraction] = []
        self.budget = budget

    def probe(self, u: int, v: int) -> bool:
        out = super().probe(u, v)
        total = self.total
        self.trajectory.append(total)
        if self.budget is not None and total > self.budget:
            raise BudgetExceeded(f"spent {total} > {self.budget}")
        return out


def is_hamiltonian_reduction(edges: set, n: int) -> list | None:
    """The path if the reduction is a single chain through all n vertices."""
    if n == 1:
        return [0]
    if len(edges) != n - 1:
        return None
    succ = dict(edges)
    if len(succ) != n - 1:
        return None
    heads = set(succ.values())
    starts = [u for u in range(n) if u not in heads]
    if len(starts) != 1:
        return None
    path = [starts[0]]
    while path[-1] in succ:
        path.append(succ[path[-1]])
    return path if len(path) == n else None


BRANCHES = ("baseline_inf", "baseline_one", "zero_then_search", "universal_then_search")


def _run_branch(name: str, instance: Instance, config: PipelineConfig):
    n = instance.n
    budget = config.abort_threshold(n) if name == "zero_then_search" else None
    session = RecordingSession(instance, budget)
    path = None
    status = "ok"
    try:
        if name == "baseline_inf":
            res = universal_sort(session, config, classes=(0, 1))
            path = is_hamiltonian_reduction(res.reduction, n)
            if path is None:
                status = "failed"
        elif name == "baseline_one":
            res = universal_sort(session, config, classes=(0, 1, 2))
            path = is_hamiltonian_reduction(res.reduction, n)
            if path is None:
                raise NoHamiltonian("all finite pairs revealed but no Hamiltonian")
        elif name == "zero_then_search":
            dag = RevealedDag(n)
            dag.closure()
            for a, b in instance.cost_model.pairs_of_class(0):
                if not dag.known(a, b):
                    if session.probe(a, b):
                        dag.add_edge(a, b)
                    else:
                        dag.add_edge(b, a)
            path = complete_hamiltonian(dag, session, allowed_classes(instance, (0, 1))).path
        else:
            res = universal_sort(session, config, classes=(0, 1))
            path = is_hamiltonian_reduction(res.reduction, n)
            if path is None:
                path = complete_hamiltonian(res.dag, session, allowed_classes(instance, (0, 1, 2))).path
    except BudgetExceeded:
        status = "aborted"
    except NoHamiltonian:
        status = "failed"
    return {"name": name, "status": status, "path": path, "cost": session.total,
            "trajectory": session.trajectory}


def interleave(branches: list[dict]) -> tuple[int, Fraction]:
    """Doubling schedule: each phase advances every live branch until its spend crosses 2^j.

    Returns (index of the winning branch, total spend over all branches).
    """
    spent = [Fraction(0)] * len(branches)
    dead = [False] * len(branches)
    cap = 1
    while not all(dead):
        for i, b in enumerate(branches):
            if dead[i]:
                continue
            traj = b["trajectory"]
            j = bisect.bisect_left(traj, cap)
            if j < len(traj):
                spent[i] = traj[j]
                continue
            spent[i] = b["cost"]
            if b["status"] == "ok":
                return i, sum(spent)
            dead[i] = True
        cap *= 2
    raise NoHamiltonian("every branch failed")


@dataclass
class FourCostResult:
    path: list
    cost: Fraction
    ratio: Fraction
    winner: str
    stats: dict


def hamiltonian_profile(instance: Instance) -> dict:
    """Post-hoc measurements k1, kF, w0, w01 of a FourLevel instance."""
    cm, order = instance.cost_model, instance.order
    classes = [cm.klass(instance, a, b) for a, b in zip(order, order[1:])]
    rank = instance.rank

    def width_of(levels) -> int:
        edges = []
        for (a, b), c in cm.pair_class.items():
            if c in levels:
                edges.append((a, b) if rank[a] < rank[b] else (b, a))
        return dag_width(RevealedDag(instance.n, edges))

    return {"k1": classes.count(1), "kF": classes.count(2), "w0": width_of({0}), "w01": width_of({0, 1})}


def sort_four_costs(instance: Instance, config: PipelineConfig | None = None) -> FourCostResult:
    if not isinstance(instance.cost_model, FourLevel) or not instance.hamiltonian:
        raise ValueError("sort_four_costs needs a FourLevel instance with the Hamiltonian promise")
    config = config or PipelineConfig()
    if config.F is not None:
        instance = Instance(instance.n, instance.order, instance.colors,
                            FourLevel(Fraction(config.F), instance.cost_model.pair_class), True)
    if instance.cost_model.F ** 4 < instance.n ** 3:
        raise ValueError("F must be at least n^(3/4)")
    runs = [_run_branch(name, instance, config) for name in BRANCHES]
    win, total = interleave(runs)
    prof = hamiltonian_profile(instance)
    opt = prof["k1"] + instance.cost_model.F * prof["kF"]
    ratio = total / opt if opt else Fraction(0) if total == 0 else math.inf
    stats = dict(prof)
    stats.update({f"cost_{b['name']}": b["cost"] for b in runs})
    stats.update({f"status_{b['name']}": b["status"] for b in runs})
    stats["winner"] = runs[win]["name"]
    stats["hamiltonian_cost"] = opt
    return FourCostResult(runs[win]["path"], total, ratio, runs[win]["name"], stats)
