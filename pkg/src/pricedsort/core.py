"""Instances, the cost-charging comparison oracle, and DAG utilities.

Element ids are dense integers ``0..N-1``.  An :class:`Instance` holds the
hidden total order (``order[rank] = id``), a color string indexed by element
id, and a cost model.  Every algorithm talks to the hidden order only through
an :class:`OracleSession`, which charges each probe at its exact rational cost.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

INF = math.inf
RED, BLUE = "R", "B"
ZERO, ONE = Fraction(0), Fraction(1)


class InfiniteCost(ValueError):
    """Probe of a forbidden (cost infinity) pair."""


class SameElement(ValueError):
    pass


class CycleDetected(ValueError):
    pass


class BadInstance(ValueError):
    pass


def as_cost(value) -> Fraction | float:
    """Parse a cost: Fraction, int, "3/2" or "inf"."""
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "∞"):
        return INF
    if value == INF:
        return INF
    return Fraction(value)


def cost_str(value) -> str:
    return "inf" if value == INF else str(Fraction(value))


# --------------------------------------------------------------------------
# cost models
#
# Each model exposes a tuple ``classes`` of finite cost values and
# ``klass(inst, u, v)`` returning an index into it, or -1 for a forbidden pair.
# Ledgers count probes per class index, which keeps the hot path free of
# Fraction arithmetic.


@dataclass(frozen=True)
class BipartiteUnit:
    kind = "bipartite"

    @property
    def classes(self):
        return (ONE,)

    def klass(self, inst: Instance, u: int, v: int) -> int:
        return 0 if inst.colors[u] != inst.colors[v] else -1

    def to_json(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class Bichromatic:
    """Red-blue pairs cost 1, red-red cost ``alpha``, blue-blue cost ``beta``."""

    alpha: Fraction
    beta: Fraction
    kind = "bichromatic"

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        object.__setattr__(self, "beta", Fraction(self.beta))
        if self.alpha <= 0 or self.beta <= 0:
            raise BadInstance("bichromatic costs must be positive")

    @property
    def classes(self):
        return (ONE, self.alpha, self.beta)

    def klass(self, inst: Instance, u: int, v: int) -> int:
        cu, cv = inst.colors[u], inst.colors[v]
        if cu != cv:
            return 0
        return 1 if cu == RED else 2

    def to_json(self) -> dict:
        return {"kind": self.kind, "alpha": str(self.alpha), "beta": str(self.beta)}


@dataclass(frozen=True)
class FourLevel:
    """Costs in {0, 1, F, inf}; ``pair_class`` maps (min id, max id) to 0, 1 or 2 (=F).

    Pairs absent from the mapping are forbidden.
    """

    F: Fraction
    pair_class: dict = field(hash=False, compare=False)
    kind = "four_level"

    def __post_init__(self):
        object.__setattr__(self, "F", Fraction(self.F))

    @property
    def classes(self):
        return (ZERO, ONE, self.F)

    def klass(self, inst: Instance, u: int, v: int) -> int:
        return self.pair_class.get((u, v) if u < v else (v, u), -1)

    def pairs_of_class(self, c: int) -> list[tuple[int, int]]:
        return sorted(p for p, k in self.pair_class.items() if k == c)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "F": str(self.F),
            "zero": [list(p) for p in self.pairs_of_class(0)],
            "one": [list(p) for p in self.pairs_of_class(1)],
            "f": [list(p) for p in self.pairs_of_class(2)],
        }


@dataclass(frozen=True)
class ExplicitMatrix:
    """Arbitrary symmetric cost matrix; entries are Fractions or INF."""

    matrix: tuple = field(hash=False, compare=False)
    kind = "explicit"

    def __post_init__(self):
        rows = tuple(tuple(as_cost(c) for c in row) for row in self.matrix)
        object.__setattr__(self, "matrix", rows)
        values = sorted({c for row in rows for c in row if c != INF})
        index = {c: i for i, c in enumerate(values)}
        object.__setattr__(self, "_classes", tuple(values))
        object.__setattr__(
            self, "_index", [[index.get(c, -1) for c in row] for row in rows]
        )

    @property
    def classes(self):
        return self._classes

    def klass(self, inst: Instance, u: int, v: int) -> int:
        return self._index[u][v]

    def to_json(self) -> dict:
        return {"kind": self.kind, "matrix": [[cost_str(c) for c in row] for row in self.matrix]}


def cost_model_from_json(d: dict):
    kind = d["kind"]
    if kind == "bipartite":
        return BipartiteUnit()
    if kind == "bichromatic":
        return Bichromatic(Fraction(d["alpha"]), Fraction(d["beta"]))
    if kind == "four_level":
        pc = {}
        for key, c in (("zero", 0), ("one", 1), ("f", 2)):
            for u, v in d.get(key, []):
                pc[(min(u, v), max(u, v))] = c
        return FourLevel(Fraction(d["F"]), pc)
    if kind == "explicit":
        return ExplicitMatrix(tuple(tuple(r) for r in d["matrix"]))
    raise BadInstance(f"unknown cost model kind {kind!r}")


# --------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class Instance:
    n: int
    order: tuple
    colors: str
    cost_model: object = field(default_factory=BipartiteUnit)
    hamiltonian: bool = False

    def __post_init__(self):
        order = tuple(int(x) for x in self.order)
        object.__setattr__(self, "order", order)
        if self.n <= 0 or sorted(order) != list(range(self.n)):
            raise BadInstance("order must be a permutation of 0..n-1")
        if len(self.colors) != self.n or set(self.colors) - {RED, BLUE}:
            raise BadInstance("colors must be an R/B string of length n")
        rank = [0] * self.n
        for r, x in enumerate(order):
            rank[x] = r
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "rank_arr", np.asarray(rank, dtype=np.int64))
        object.__setattr__(self, "red_mask", np.frombuffer(self.colors.encode(), dtype=np.uint8) == ord(RED))
        cm = self.cost_model
        if isinstance(cm, FourLevel) and cm.F ** 4 < Fraction(self.n) ** 3:
            raise BadInstance(f"F={cm.F} below n^(3/4) for n={self.n}")
        if self.hamiltonian:
            for a, b in zip(order, order[1:]):
                if cm.klass(self, a, b) < 0:
                    raise BadInstance("hamiltonian promise violated by a forbidden rank-adjacent pair")

    # rank[u] < rank[v]
    def less(self, u: int, v: int) -> bool:
        return self.rank[u] < self.rank[v]

    def cost(self, u: int, v: int):
        k = self.cost_model.klass(self, u, v)
        return INF if k < 0 else self.cost_model.classes[k]

    def reds(self) -> list[int]:
        return [i for i, c in enumerate(self.colors) if c == RED]

    def blues(self) -> list[int]:
        return [i for i, c in enumerate(self.colors) if c == BLUE]

    def ordered_colors(self) -> str:
        return "".join(self.colors[x] for x in self.order)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "colors": self.colors,
            "order": list(self.order),
            "cost_model": self.cost_model.to_json(),
            "hamiltonian": self.hamiltonian,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, d: dict) -> Instance:
        return cls(
            n=int(d["n"]),
            order=tuple(d["order"]),
            colors=d["colors"],
            cost_model=cost_model_from_json(d["cost_model"]),
            hamiltonian=bool(d.get("hamiltonian", False)),
        )

    @classmethod
    def loads(cls, text: str) -> Instance:
        return cls.from_json(json.loads(text))


def instance_from_colors(ranked_colors: str, cost_model=None, ids=None, hamiltonian=False) -> Instance:
    """Build an instance from the colors listed in rank order.

    ``ids[r]`` is the element id at rank r (identity when omitted).
    """
    n = len(ranked_colors)
    ids = list(range(n)) if ids is None else list(ids)
    colors = [""] * n
    for r, x in enumerate(ids):
        colors[x] = ranked_colors[r]
    return Instance(n, tuple(ids), "".join(colors), cost_model or BipartiteUnit(), hamiltonian)


# --------------------------------------------------------------------------
# ledger and oracle


@dataclass
class CostLedger:
    classes: tuple
    counts: list = None

    def __post_init__(self):
        if self.counts is None:
            self.counts = [0] * len(self.classes)

    @property
    def count_by_class(self) -> dict:
        return {c: k for c, k in zip(self.classes, self.counts) if k}

    @property
    def total(self) -> Fraction:
        return sum((c * k for c, k in zip(self.classes, self.counts)), ZERO)

    @property
    def probes(self) -> int:
        return sum(self.counts)


class OracleSession:
    """The only channel to an instance's hidden order.

    ``probe(u, v)`` returns True iff u precedes v.  With ``repeat_charging``
    off, a pair already probed is answered from the memo without charge.
    ``record_pairs`` keeps the set of probed pairs; memo mode forces it on.
    """

    def __init__(self, instance: Instance, repeat_charging: bool = True, record_pairs: bool = True):
        self.instance = instance
        self.repeat_charging = repeat_charging
        self.record_pairs = record_pairs or not repeat_charging
        self.ledger = CostLedger(instance.cost_model.classes)
        self.probed: set[int] = set()
        self._rank = instance.rank
        self._klass = instance.cost_model.klass
        self._n = instance.n

    @property
    def total(self) -> Fraction:
        return self.ledger.total

    @property
    def probes(self) -> int:
        return self.ledger.probes

    def _key(self, u: int, v: int) -> int:
        return u * self._n + v if u < v else v * self._n + u

    def probe(self, u: int, v: int) -> bool:
        if u == v:
            raise SameElement(f"probe({u}, {u})")
        k = self._klass(self.instance, u, v)
        if k < 0:
            raise InfiniteCost(f"pair ({u}, {v}) is forbidden")
        if self.record_pairs:
            key = u * self._n + v if u < v else v * self._n + u
            if key in self.probed:
                if self.repeat_charging:
                    self.ledger.counts[k] += 1
            else:
                self.probed.add(key)
                self.ledger.counts[k] += 1
        else:
            self.ledger.counts[k] += 1
        return self._rank[u] < self._rank[v]

    def probe_many(self, pivot: int, elems) -> np.ndarray:
        """Probe ``pivot`` against every element; returns mask ``elem < pivot``.

        All elements must share one color, so one cost class applies.
        """
        elems = np.asarray(elems, dtype=np.int64)
        if elems.size == 0:
            return np.zeros(0, dtype=bool)
        first = int(elems[0])
        k = self._klass(self.instance, pivot, first)
        if k < 0:
            raise InfiniteCost(f"pair ({pivot}, {first}) is forbidden")
        inst = self.instance
        if np.any(inst.red_mask[elems] != inst.red_mask[first]) or np.any(elems == pivot):
            raise ValueError("probe_many needs a single-color batch without the pivot")
        if not isinstance(inst.cost_model, (BipartiteUnit, Bichromatic)):
            return np.fromiter((self.probe(int(e), pivot) for e in elems), bool, elems.size)
        self._charge_batch(k, np.minimum(elems, pivot) * self._n + np.maximum(elems, pivot))
        return inst.rank_arr[elems] < self._rank[pivot]

    def probe_block(self, left, right) -> np.ndarray:
        """Probe all pairs of two single-colored groups; returns mask[i, j] = left[i] < right[j]."""
        left = np.asarray(left, dtype=np.int64)
        right = np.asarray(right, dtype=np.int64)
        if left.size == 0 or right.size == 0:
            return np.zeros((left.size, right.size), dtype=bool)
        us = np.repeat(left, right.size)
        vs = np.tile(right, left.size)
        return self.probe_pairs(us, vs).reshape(left.size, right.size)

    def probe_pairs(self, us, vs) -> np.ndarray:
        """Probe pairs (us[i], vs[i]) of one color combination; returns mask us < vs."""
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        if us.size == 0:
            return np.zeros(0, dtype=bool)
        inst = self.instance
        if not isinstance(inst.cost_model, (BipartiteUnit, Bichromatic)):
            return np.fromiter((self.probe(int(a), int(b)) for a, b in zip(us, vs)), bool, us.size)
        red = inst.red_mask
        if np.any(us == vs):
            raise SameElement("batch contains a self pair")
        if np.any(red[us] != red[us[0]]) or np.any(red[vs] != red[vs[0]]):
            raise ValueError("probe_pairs needs one color combination per batch")
        k = self._klass(inst, int(us[0]), int(vs[0]))
        if k < 0:
            raise InfiniteCost("forbidden batch")
        self._charge_batch(k, np.minimum(us, vs) * self._n + np.maximum(us, vs))
        return inst.rank_arr[us] < inst.rank_arr[vs]

    def _charge_batch(self, k: int, keys: np.ndarray) -> None:
        if not self.record_pairs:
            self.ledger.counts[k] += int(keys.size)
            return
        keys = keys.tolist()
        if self.repeat_charging:
            self.ledger.counts[k] += len(keys)
            self.probed.update(keys)
            return
        fresh = 0
        for key in keys:
            if key not in self.probed:
                self.probed.add(key)
                fresh += 1
        self.ledger.counts[k] += fresh

    def revealed_edges(self) -> set[tuple[int, int]]:
        """Directed edges (lower rank -> higher rank) of all recorded probes."""
        n, rank = self._n, self._rank
        out = set()
        for key in self.probed:
            u, v = divmod(key, n)
            out.add((u, v) if rank[u] < rank[v] else (v, u))
        return out


# --------------------------------------------------------------------------
# DAGs


class RevealedDag:
    """Directed graph on ``0..n-1`` with optional cached reachability bitsets."""

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        self.n = n
        self.succ: list[set[int]] = [set() for _ in range(n)]
        self._reach: list[int] | None = None
        for u, v in edges:
            self.add_edge(u, v)

    @property
    def edges(self) -> set[tuple[int, int]]:
        return {(u, v) for u in range(self.n) for v in self.succ[u]}

    def add_edge(self, u: int, v: int) -> None:
        if v not in self.succ[u]:
            self.succ[u].add(v)
            if self._reach is not None:
                self._add_to_closure(u, v)

    def _add_to_closure(self, u: int, v: int) -> None:
        reach = self._reach
        if (reach[v] >> u) & 1 or u == v:
            raise CycleDetected(f"edge ({u}, {v}) closes a cycle")
        if (reach[u] >> v) & 1:
            return
        gain = reach[v] | (1 << v)
        ubit = 1 << u
        for x in range(self.n):
            if x == u or (reach[x] & ubit):
                reach[x] |= gain

    def topological_order(self) -> list[int]:
        indeg = [0] * self.n
        for u in range(self.n):
            for v in self.succ[u]:
                indeg[v] += 1
        stack = [u for u in range(self.n) if indeg[u] == 0]
        out = []
        while stack:
            u = stack.pop()
            out.append(u)
            for v in self.succ[u]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    stack.append(v)
        if len(out) != self.n:
            raise CycleDetected("graph has a directed cycle")
        return out

    def closure(self) -> list[int]:
        """reach[u] has bit v set iff a nonempty path u -> v exists."""
        if self._reach is None:
            reach = [0] * self.n
            for u in reversed(self.topological_order()):
                r = 0
                for v in self.succ[u]:
                    r |= reach[v] | (1 << v)
                reach[u] = r
            self._reach = reach
        return self._reach

    def reaches(self, u: int, v: int) -> bool:
        return bool((self.closure()[u] >> v) & 1)

    def known(self, u: int, v: int) -> bool:
        reach = self.closure()
        return bool((reach[u] >> v) & 1 or (reach[v] >> u) & 1)

    def subgraph_closure(self, vertices: Sequence[int]) -> dict[int, set[int]]:
        vs = set(vertices)
        reach = self.closure()
        return {u: {v for v in vs if (reach[u] >> v) & 1} for u in vs}


def transitive_reduction(dag: RevealedDag | Iterable[tuple[int, int]], n: int | None = None) -> set[tuple[int, int]]:
    """Essential edges: (u, v) kept iff no u -> v path of length >= 2 exists."""
    if not isinstance(dag, RevealedDag):
        edges = list(dag)
        size = n if n is not None else 1 + max((max(e) for e in edges), default=-1)
        dag = RevealedDag(size, edges)
    reach = dag.closure()
    out = set()
    for u in range(dag.n):
        succ = dag.succ[u]
        if not succ:
            continue
        implied = 0
        for w in succ:
            implied |= reach[w]
        out.update((u, v) for v in succ if not (implied >> v) & 1)
    return out


def chain_decomposition(dag: RevealedDag, vertices: Sequence[int] | None = None) -> list[list[int]]:
    """Minimum chain cover of the closure (Dilworth), each chain sorted ascending."""
    vs = list(range(dag.n)) if vertices is None else list(vertices)
    reach = dag.closure()
    g = nx.Graph()
    left = [("o", u) for u in vs]
    g.add_nodes_from(left, bipartite=0)
    g.add_nodes_from((("i", v) for v in vs), bipartite=1)
    vset = set(vs)
    for u in vs:
        r = reach[u]
        g.add_edges_from((("o", u), ("i", v)) for v in vset if (r >> v) & 1)
    matching = nx.bipartite.hopcroft_karp_matching(g, top_nodes=left)
    nxt = {u: matching[("o", u)][1] for u in vs if ("o", u) in matching}
    has_pred = set(nxt.values())
    chains = []
    for u in vs:
        if u in has_pred:
            continue
        chain = [u]
        while chain[-1] in nxt:
            chain.append(nxt[chain[-1]])
        chains.append(chain)
    return chains


def dag_width(dag: RevealedDag, vertices: Sequence[int] | None = None) -> int:
    """Size of a maximum antichain, via minimum chain cover of the closure."""
    if dag.n == 0:
        return 0
    return len(chain_decomposition(dag, vertices))


# --------------------------------------------------------------------------
# stripes and ground truth


@dataclass(frozen=True)
class StripeDecomposition:
    stripes: tuple
    first_color: str

    @property
    def size_vector(self) -> list[int]:
        return [len(s) for s in self.stripes]

    def as_sets(self) -> list[frozenset]:
        return [frozenset(s) for s in self.stripes]

    def edges(self) -> set[tuple[int, int]]:
        """Complete bipartite edges between consecutive stripes."""
        out = set()
        for a, b in zip(self.stripes, self.stripes[1:]):
            out.update((x, y) for x in a for y in b)
        return out


def stripes_of(instance: Instance) -> StripeDecomposition:
    """Maximal monochromatic runs of the hidden order."""
    stripes: list[list[int]] = []
    prev = None
    for x in instance.order:
        c = instance.colors[x]
        if c != prev:
            stripes.append([])
            prev = c
        stripes[-1].append(x)
    first = instance.colors[instance.order[0]]
    return StripeDecomposition(tuple(tuple(s) for s in stripes), first)


def canonical_size_vector(decomp: StripeDecomposition, colors: str | None = None) -> list[int]:
    if any(len(s) == 0 for s in decomp.stripes):
        raise ValueError("empty stripe")
    if colors is not None:
        tags = [{colors[x] for x in s} for s in decomp.stripes]
        if any(len(t) != 1 for t in tags):
            raise ValueError("stripe is not monochromatic")
        if any(a == b for a, b in zip(tags, tags[1:])):
            raise ValueError("two adjacent stripes share a color")
    return decomp.size_vector


def ground_truth_dag(instance: Instance) -> RevealedDag:
    """All finite-cost pairs, directed by the hidden order."""
    n, order = instance.n, instance.order
    dag = RevealedDag(n)
    for i in range(n):
        a = order[i]
        for j in range(i + 1, n):
            b = order[j]
            if instance.cost_model.klass(instance, a, b) >= 0:
                dag.succ[a].add(b)
    return dag


def ground_truth_reduction(instance: Instance) -> set[tuple[int, int]]:
    if isinstance(instance.cost_model, BipartiteUnit):
        return stripes_of(instance).edges()
    if instance.hamiltonian:
        return set(zip(instance.order, instance.order[1:]))
    return transitive_reduction(ground_truth_dag(instance))


def verify_output(claimed, instance: Instance) -> bool:
    """True iff ``claimed`` is exactly the transitive reduction of the ground truth.

    ``claimed`` may be a directed edge set, a StripeDecomposition (bipartite
    instances) or a full order (a sequence of ids).
    """
    if isinstance(claimed, StripeDecomposition):
        if not isinstance(instance.cost_model, BipartiteUnit):
            return False
        return claimed.as_sets() == stripes_of(instance).as_sets()
    if isinstance(claimed, (list, tuple)) and (not claimed or isinstance(claimed[0], (int, np.integer))):
        return tuple(int(x) for x in claimed) == instance.order
    return set(map(tuple, claimed)) == ground_truth_reduction(instance)
