"""InversionSort for bipartite instances and its bichromatic extension.

The backbone is an alternating list of representatives ``r_0, b_1, ..., b_{2k+1}``
whose first and last entries are artificial extremes (ids ``LO`` and ``HI``).
Each representative owns a bucket of same-colored elements lying strictly
between its two neighboring representatives.  Adjacent bucket pairs are the
subproblems in which inversions are searched round-robin.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .core import (
    BLUE,
    RED,
    Bichromatic,
    BipartiteUnit,
    Instance,
    OracleSession,
    StripeDecomposition,
)

LO, HI = -1, -2  # artificial smallest red / largest blue


class InconsistentInversion(RuntimeError):
    """Probes contradict the order an inversion is supposed to certify."""


# --------------------------------------------------------------------------
# stats


@dataclass
class RunStats:
    seed: int | None
    n: int
    size_vector: list = field(default_factory=list)
    total_cost: Fraction = Fraction(0)
    pivot_cost: Fraction = Fraction(0)
    search_cost: Fraction = Fraction(0)
    tree_depth: int = 0
    rounds: int = 0
    probes: int = 0
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = asdict(self)
        for key in ("total_cost", "pivot_cost", "search_cost"):
            d[key] = str(Fraction(d[key]))
        d["extra"] = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in self.extra.items()}
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# --------------------------------------------------------------------------
# state


@dataclass
class RefinementTreeNode:
    left: int
    right: int
    polarity: str  # color of the smaller pivot
    depth: int
    pairs: int  # |R_v| * |B_v| of the list subinstance at creation
    children: list = field(default_factory=list)


@dataclass
class SubproblemState:
    left: int
    right: int
    node: RefinementTreeNode
    counter: int = 0
    finished: bool = False
    inversion: tuple | None = None  # (x, y): x in left bucket, y in right bucket, y < x
    drawn: set = field(default_factory=set)  # pair keys drawn here
    known: bool = False  # every pair between the two buckets was probed earlier
    # bichromatic extension
    spent: Fraction = Fraction(0)
    credit_left: Fraction = Fraction(0)
    credit_right: Fraction = Fraction(0)
    sample_left: set = field(default_factory=set)
    sample_right: set = field(default_factory=set)
    max_left: int | None = None
    min_right: int | None = None
    mono_left: int = 0
    mono_right: int = 0
    bichromatic: int = 0


@dataclass
class Backbone:
    reps: list
    buckets: list

    def color_at(self, i: int) -> str:
        return RED if i % 2 == 0 else BLUE


# --------------------------------------------------------------------------
# cheapest no-inversion proof


PROOF_KINDS = ("AllPairs", "RedMax", "BlueMin", "BothExtremes")


def cheapest_proof(A: int, B: int, alpha, beta) -> tuple[Fraction, str]:
    """Cheapest certificate that a lower group of A elements precedes an upper group of B.

    ``alpha`` prices comparisons inside the lower group, ``beta`` inside the
    upper group; cross comparisons cost 1.  Ties go to the earlier kind.
    """
    if A < 1 or B < 1:
        raise ValueError("both groups must be non-empty")
    alpha, beta = Fraction(alpha), Fraction(beta)
    costs = (
        Fraction(A * B),
        alpha * (A - 1) + B,
        beta * (B - 1) + A,
        alpha * (A - 1) + beta * (B - 1) + 1,
    )
    best = min(range(4), key=lambda i: (costs[i], i))
    return costs[best], PROOF_KINDS[best]


# --------------------------------------------------------------------------
# merge sorting with counted probes


def merge_sort(items, less) -> list:
    """Top-down merge sort; at most n*ceil(log2 n) - 2^ceil(log2 n) + 1 comparisons."""
    items = list(items)
    if len(items) <= 1:
        return items
    mid = len(items) // 2
    a, b = merge_sort(items[:mid], less), merge_sort(items[mid:], less)
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        if less(a[i], b[j]):
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return out


def sort_stripes_merge(stripes, session: OracleSession) -> list[int]:
    """Sort every stripe with monochromatic probes and concatenate."""
    order = []
    for stripe in stripes:
        order.extend(merge_sort(stripe, session.probe))
    return order


# --------------------------------------------------------------------------
# InversionSort


class InversionSort:
    """One run of InversionSort over an oracle session.

    ``bichromatic`` switches on sample-extreme maintenance with monochromatic
    probes, triples of cross probes, and cheapest-proof fallback.
    ``sampling`` is "with" (uniform with replacement) or "without".
    """

    def __init__(self, session: OracleSession, rng: random.Random, bichromatic: bool = False,
                 sampling: str = "with", check_invariants: bool = False):
        self.session = session
        self.inst: Instance = session.instance
        self.rng = rng
        self.bichromatic = bichromatic
        self.sampling = sampling
        self.check_invariants = check_invariants
        if bichromatic:
            cm = self.inst.cost_model
            self.mono = {RED: cm.alpha, BLUE: cm.beta}
        n = self.inst.n
        self._rank = self.inst.rank
        order_red = np.asarray([self.inst.colors[x] == RED for x in self.inst.order], dtype=np.int64)
        self._red_prefix = np.concatenate([[0], np.cumsum(order_red)])
        self.backbone = Backbone([LO, HI], [self.inst.reds(), self.inst.blues()])
        root = RefinementTreeNode(LO, HI, RED, 0, self._pairs(LO, HI))
        self.root = root
        self.nodes = [root]
        self.subs: dict[tuple[int, int], SubproblemState] = {(LO, HI): SubproblemState(LO, HI, root)}
        self.rounds = 0
        self.pivot_probes = 0
        self.first_inversion: tuple | None = None
        self._where: dict[int, int] = {}
        self._known_groups: dict[int, list] = {}
        self._reindex()
        self._n = n

    # -- helpers -------------------------------------------------------------

    def rank_of(self, x: int) -> int:
        if x == LO:
            return -1
        if x == HI:
            return self.inst.n
        return self._rank[x]

    def _pairs(self, a: int, b: int) -> int:
        lo, hi = self.rank_of(a), self.rank_of(b)
        lo, hi = max(lo, 0), min(hi, self.inst.n - 1)
        if hi < lo:
            return 0
        reds = int(self._red_prefix[hi + 1] - self._red_prefix[lo])
        return reds * (hi - lo + 1 - reds)

    def _reindex(self) -> None:
        self._where = {x: i for i, b in enumerate(self.backbone.buckets) for x in b}

    def _key(self, u: int, v: int) -> int:
        n = self.inst.n
        return u * n + v if u < v else v * n + u

    @property
    def done(self) -> bool:
        return all(s.finished for s in self.subs.values())

    # -- rounds --------------------------------------------------------------

    def run(self, max_rounds: int | None = None) -> None:
        while not self.done:
            if max_rounds is not None and self.rounds >= max_rounds:
                break
            self.run_round()

    def run_round(self) -> dict[int, tuple[int, int]]:
        """One round-robin pass over unfinished subproblems, then backbone extension."""
        reps, buckets = self.backbone.reps, self.backbone.buckets
        found: dict[int, tuple[int, int]] = {}
        for i in range(len(reps) - 1):
            sp = self.subs[(reps[i], reps[i + 1])]
            if sp.finished:
                continue
            A, B = buckets[i], buckets[i + 1]
            if not A or not B:
                sp.finished = True
                continue
            inv = self._step_bichromatic(sp, i, A, B) if self.bichromatic else self._step(sp, A, B)
            if inv is not None:
                sp.inversion = inv
                found[i] = inv
                if self.first_inversion is None:
                    self.first_inversion = inv
        self.rounds += 1
        if found:
            self._extend(found)
        if self.check_invariants:
            self.assert_invariants()
        return found

    def _step(self, sp: SubproblemState, A: list, B: list):
        size = len(A) * len(B)
        if sp.known:
            return self._resolve_known(sp, A, B)
        if sp.counter >= size:
            return self._exhaust(sp, A, B)
        rng = self.rng
        if self.sampling == "without":
            while True:
                a, b = A[rng.randrange(len(A))], B[rng.randrange(len(B))]
                if self._key(a, b) not in sp.drawn:
                    break
        else:
            a, b = A[rng.randrange(len(A))], B[rng.randrange(len(B))]
        sp.drawn.add(self._key(a, b))
        sp.counter += 1
        if not self.session.probe(a, b):
            return (a, b)
        return None

    def _probe_undrawn(self, sp: SubproblemState, A: list, B: list):
        """Probe every pair between A and B not drawn before in this subproblem.

        Returns the pair arrays and the inversion mask over all pairs; outcomes
        of drawn pairs are known from their own probes.
        """
        A_arr = np.asarray(A, dtype=np.int64)
        B_arr = np.asarray(B, dtype=np.int64)
        us = np.repeat(A_arr, B_arr.size)
        vs = np.tile(B_arr, A_arr.size)
        keys = np.minimum(us, vs) * self.inst.n + np.maximum(us, vs)
        if sp.drawn:
            fresh = ~np.isin(keys, np.fromiter(sp.drawn, np.int64, len(sp.drawn)))
        else:
            fresh = np.ones(keys.size, dtype=bool)
        self.session.probe_pairs(us[fresh], vs[fresh])
        sp.drawn.clear()
        rank = self.inst.rank_arr
        return us, vs, rank[us] > rank[vs]

    def _exhaust(self, sp: SubproblemState, A: list, B: list):
        us, vs, inverted = self._probe_undrawn(sp, A, B)
        group = (frozenset(A), frozenset(B))
        for x in group[0] | group[1]:
            self._known_groups.setdefault(x, []).append(group)
        if not inverted.any():
            sp.finished = True
            return None
        first = int(np.argmax(inverted))
        sp.known = True
        return (int(us[first]), int(vs[first]))

    def _resolve_known(self, sp: SubproblemState, A: list, B: list):
        rank = self._rank
        for a in A:
            for b in B:
                if rank[b] < rank[a]:
                    return (a, b)
        sp.finished = True
        return None

    def _is_known(self, p: int, elems: list) -> bool:
        for ga, gb in self._known_groups.get(p, ()):
            other = gb if p in ga else ga
            if all(e in other for e in elems):
                return True
        return False

    # -- bichromatic step ----------------------------------------------------

    def _step_bichromatic(self, sp: SubproblemState, i: int, A: list, B: list):
        cl, cr = self.backbone.color_at(i), self.backbone.color_at(i + 1)
        ml, mr = self.mono[cl], self.mono[cr]
        self._refresh_samples(sp, i)
        cost, kind = cheapest_proof(len(A), len(B), ml, mr)
        if sp.spent >= cost:
            return self._run_proof(sp, A, B, kind, ml, mr)
        rng, probe = self.rng, self.session.probe
        a, b = A[rng.randrange(len(A))], B[rng.randrange(len(B))]
        bi = 1
        sp.drawn.add(self._key(a, b))
        inv = None if probe(a, b) else (a, b)
        if inv is None and sp.max_left is not None:
            b2 = B[rng.randrange(len(B))]
            bi += 1
            sp.drawn.add(self._key(sp.max_left, b2))
            if not probe(sp.max_left, b2):
                inv = (sp.max_left, b2)
        if inv is None and sp.min_right is not None:
            a2 = A[rng.randrange(len(A))]
            bi += 1
            sp.drawn.add(self._key(a2, sp.min_right))
            if not probe(a2, sp.min_right):
                inv = (a2, sp.min_right)
        sp.spent += bi
        sp.bichromatic += bi
        if inv is not None:
            return inv
        sp.credit_left += Fraction(bi) / ml
        sp.credit_right += Fraction(bi) / mr
        while sp.credit_left >= 1 and inv is None:
            sp.credit_left -= 1
            inv = self._grow_sample(sp, A, left=True, mono=ml)
        while sp.credit_right >= 1 and inv is None:
            sp.credit_right -= 1
            inv = self._grow_sample(sp, B, left=False, mono=mr)
        return inv

    def _refresh_samples(self, sp: SubproblemState, i: int) -> None:
        where = self._where
        if sp.max_left is not None and where.get(sp.max_left) != i:
            sp.sample_left.clear()
            sp.max_left = None
        else:
            sp.sample_left = {z for z in sp.sample_left if where.get(z) == i}
        if sp.min_right is not None and where.get(sp.min_right) != i + 1:
            sp.sample_right.clear()
            sp.min_right = None
        else:
            sp.sample_right = {z for z in sp.sample_right if where.get(z) == i + 1}

    def _grow_sample(self, sp: SubproblemState, bucket: list, left: bool, mono: Fraction):
        sample = sp.sample_left if left else sp.sample_right
        if len(sample) >= len(bucket):
            return None
        rng = self.rng
        z = bucket[rng.randrange(len(bucket))]
        while z in sample:
            z = bucket[rng.randrange(len(bucket))]
        sample.add(z)
        ext = sp.max_left if left else sp.min_right
        if ext is None:
            if left:
                sp.max_left = z
            else:
                sp.min_right = z
            return None
        probe = self.session.probe
        sp.spent += mono
        if left:
            sp.mono_left += 1
            if not probe(ext, z):
                return None
            sp.max_left = z
            if sp.min_right is None:
                return None
            sp.spent += 1
            sp.bichromatic += 1
            return None if probe(z, sp.min_right) else (z, sp.min_right)
        sp.mono_right += 1
        if not probe(z, ext):
            return None
        sp.min_right = z
        if sp.max_left is None:
            return None
        sp.spent += 1
        sp.bichromatic += 1
        return None if probe(sp.max_left, z) else (sp.max_left, z)

    def _run_proof(self, sp: SubproblemState, A: list, B: list, kind: str, ml, mr):
        rng, session = self.rng, self.session
        sp.extra_proof = kind
        if kind == "AllPairs":
            us, vs, inverted = self._probe_undrawn(sp, A, B)
            bad = np.flatnonzero(inverted)
            if bad.size == 0:
                sp.finished = True
                return None
            k = int(bad[rng.randrange(bad.size)])
            return (int(us[k]), int(vs[k]))
        top = bottom = None
        if kind in ("RedMax", "BothExtremes"):
            top = A[0]
            for z in A[1:]:
                if session.probe(top, z):
                    top = z
        if kind in ("BlueMin", "BothExtremes"):
            bottom = B[0]
            for z in B[1:]:
                if session.probe(z, bottom):
                    bottom = z
        if kind == "RedMax":
            below = [b for b, ok in zip(B, session.probe_many(top, B)) if ok]
            if not below:
                sp.finished = True
                return None
            return (top, below[rng.randrange(len(below))])
        if kind == "BlueMin":
            above = [a for a, ok in zip(A, session.probe_many(bottom, A)) if not ok]
            if not above:
                sp.finished = True
                return None
            return (above[rng.randrange(len(above))], bottom)
        if session.probe(top, bottom):
            sp.finished = True
            return None
        return (top, bottom)

    # -- extension and pivoting ------------------------------------------------

    def _pivot(self, pivot: int, elems: list) -> tuple[list, list]:
        """Split elems into (below pivot, above pivot)."""
        if not elems:
            return [], []
        if self._is_known(pivot, elems):
            rank, rp = self._rank, self._rank[pivot]
            below = [e for e in elems if rank[e] < rp]
            above = [e for e in elems if rank[e] > rp]
            return below, above
        mask = self.session.probe_many(pivot, elems)
        self.pivot_probes += len(elems)
        below = [e for e, m in zip(elems, mask) if m]
        above = [e for e, m in zip(elems, mask) if not m]
        return below, above

    def _extend(self, found: dict[int, tuple[int, int]]) -> None:
        reps, buckets = self.backbone.reps, self.backbone.buckets
        rank_of = self.rank_of
        for i, (x, y) in found.items():
            if not rank_of(reps[i]) < rank_of(y) < rank_of(x) < rank_of(reps[i + 1]):
                raise InconsistentInversion(f"inversion {(x, y)} not inside ({reps[i]}, {reps[i + 1]})")
        parts = []
        for j, bucket in enumerate(buckets):
            left_inv, right_inv = found.get(j - 1), found.get(j)
            drop = set()
            if left_inv:
                drop.add(left_inv[1])
            if right_inv:
                drop.add(right_inv[0])
            elems = [e for e in bucket if e not in drop] if drop else bucket
            above: list = []
            if right_inv:
                elems, above = self._pivot(right_inv[1], elems)
            below: list = []
            if left_inv:
                below, elems = self._pivot(left_inv[0], elems)
            parts.append((below, elems, above))
        new_reps, new_buckets = [], []
        new_subs: dict[tuple[int, int], SubproblemState] = {}
        for j, rep in enumerate(reps):
            new_reps.append(rep)
            new_buckets.append(parts[j][1])
            if j in found:
                x, y = found[j]
                new_reps.extend((y, x))
                new_buckets.extend((parts[j + 1][0], parts[j][2]))
        for a, b in zip(new_reps, new_reps[1:]):
            sp = self.subs.get((a, b))
            if sp is None:
                continue
            new_subs[(a, b)] = sp
        for j, (x, y) in found.items():
            parent = self.subs[(reps[j], reps[j + 1])]
            node = parent.node
            for a, b in ((reps[j], y), (y, x), (x, reps[j + 1])):
                pol = RED if rank_of(a) >= 0 and self.inst.colors[a] == RED or a == LO else BLUE
                child = RefinementTreeNode(a, b, pol, node.depth + 1, self._pairs(a, b))
                node.children.append(child)
                self.nodes.append(child)
                new_subs[(a, b)] = SubproblemState(a, b, child, known=parent.known)
        self.backbone = Backbone(new_reps, new_buckets)
        self.subs = new_subs
        self._reindex()

    # -- inspection ------------------------------------------------------------

    def assert_invariants(self) -> None:
        reps, buckets = self.backbone.reps, self.backbone.buckets
        rank_of, colors = self.rank_of, self.inst.colors
        seen = 0
        for i, rep in enumerate(reps):
            color = self.backbone.color_at(i)
            if rep not in (LO, HI):
                assert colors[rep] == color
            if i + 1 < len(reps):
                assert rank_of(rep) < rank_of(reps[i + 1]), "backbone out of order"
            lo = rank_of(reps[i - 1]) if i > 0 else -1
            hi = rank_of(reps[i + 1]) if i + 1 < len(reps) else self.inst.n
            for e in buckets[i]:
                assert colors[e] == color and lo < rank_of(e) < hi, "bucket outside its window"
            seen += len(buckets[i]) + (rep not in (LO, HI))
        assert seen == self.inst.n

    def tree_depth(self) -> int:
        return max(node.depth for node in self.nodes)

    def stripes(self) -> StripeDecomposition:
        out = []
        for rep, bucket in zip(self.backbone.reps, self.backbone.buckets):
            stripe = list(bucket) + ([rep] if rep not in (LO, HI) else [])
            if stripe:
                out.append(tuple(sorted(stripe)))
        first = self.inst.colors[out[0][0]]
        return StripeDecomposition(tuple(out), first)


def _new_session(instance: Instance, session: OracleSession | None, **kw) -> OracleSession:
    return session if session is not None else OracleSession(instance, **kw)


def run_bipartite(instance: Instance, seed: int = 0, session: OracleSession | None = None,
                  sampling: str = "with", check_invariants: bool = False):
    """Recover the stripes of a bipartite instance; returns (StripeDecomposition, RunStats)."""
    if not isinstance(instance.cost_model, BipartiteUnit):
        raise ValueError("run_bipartite needs a BipartiteUnit instance")
    session = _new_session(instance, session)
    alg = InversionSort(session, random.Random(seed), sampling=sampling, check_invariants=check_invariants)
    alg.run()
    dec = alg.stripes()
    total = session.total
    stats = RunStats(
        seed=seed, n=instance.n, size_vector=dec.size_vector, total_cost=total,
        pivot_cost=Fraction(alg.pivot_probes), search_cost=total - alg.pivot_probes,
        tree_depth=alg.tree_depth(), rounds=alg.rounds, probes=session.probes,
    )
    stats.algorithm = alg
    return dec, stats


def run_bichromatic(instance: Instance, seed: int = 0, session: OracleSession | None = None):
    """Fully sort a bichromatic instance with alpha, beta > 1; returns (order, RunStats)."""
    cm = instance.cost_model
    if not isinstance(cm, Bichromatic) or cm.alpha <= 1 or cm.beta <= 1:
        raise ValueError("run_bichromatic needs Bichromatic costs with alpha, beta > 1")
    session = _new_session(instance, session)
    if not instance.reds() or not instance.blues():
        order = merge_sort(range(instance.n), session.probe)
        stats = RunStats(seed=seed, n=instance.n, size_vector=[instance.n], total_cost=session.total,
                         probes=session.probes)
        return order, stats
    alg = InversionSort(session, random.Random(seed), bichromatic=True)
    alg.run()
    dec = alg.stripes()
    phase1 = session.total
    order = sort_stripes_merge(dec.stripes, session)
    stats = RunStats(
        seed=seed, n=instance.n, size_vector=dec.size_vector, total_cost=session.total,
        pivot_cost=Fraction(alg.pivot_probes), search_cost=phase1 - alg.pivot_probes,
        tree_depth=alg.tree_depth(), rounds=alg.rounds, probes=session.probes,
        extra={"phase1_cost": phase1, "stripe_sort_cost": session.total - phase1},
    )
    stats.algorithm = alg
    return order, stats


# --------------------------------------------------------------------------
# the two easy bichromatic cost regimes


def _gallop(run: list, start: int, below) -> int:
    """First index i >= start with not below(run[i]), knowing below(run[start]) is True.

    Probes offset 1, then the last element, then doubles and binary-searches.
    """
    n = len(run)
    if start + 1 >= n:
        return n
    if not below(run[start + 1]):
        return start + 1
    if not below(run[n - 1]):
        hi = n - 1
    else:
        return n
    lo, step = start + 1, 2
    while lo + step < hi:
        if below(run[lo + step]):
            lo = lo + step
            step *= 2
        else:
            hi = lo + step
            break
    # invariant: below(run[lo]) and not below(run[hi])
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if below(run[mid]):
            lo = mid
        else:
            hi = mid
    return hi


def galloping_merge(xs: list, ys: list, probe) -> list:
    """Merge two sorted lists of different colors with exponential searches."""
    if not xs or not ys:
        return list(xs) + list(ys)
    if not probe(xs[0], ys[0]):
        xs, ys = ys, xs
    out = []
    i = j = 0
    # xs[i] < ys[j] is known here
    while True:
        head = ys[j]
        end = _gallop(xs, i, lambda e: probe(e, head))
        out.extend(xs[i:end])
        i = end
        if i == len(xs):
            out.extend(ys[j:])
            return out
        # now ys[j] < xs[i] is known
        xs, ys, i, j = ys, xs, j, i


def bichromatic_most_expensive(instance: Instance, session: OracleSession | None = None) -> list[int]:
    """Sort each color monochromatically, then merge with galloping cross probes."""
    session = _new_session(instance, session)
    reds = merge_sort(instance.reds(), session.probe)
    blues = merge_sort(instance.blues(), session.probe)
    return galloping_merge(reds, blues, session.probe)


def bichromatic_middle_expensive(instance: Instance, session: OracleSession | None = None) -> list[int]:
    """Cheap color sorted first, dear color placed by binary search, then stripes sorted."""
    session = _new_session(instance, session)
    cm = instance.cost_model
    cheap, dear = (RED, BLUE) if cm.alpha <= cm.beta else (BLUE, RED)
    cheap_ids = [x for x in range(instance.n) if instance.colors[x] == cheap]
    dear_ids = [x for x in range(instance.n) if instance.colors[x] == dear]
    spine = merge_sort(cheap_ids, session.probe)
    gaps: list[list[int]] = [[] for _ in range(len(spine) + 1)]
    for d in dear_ids:
        lo, hi = 0, len(spine)
        while lo < hi:
            mid = (lo + hi) // 2
            if session.probe(spine[mid], d):
                lo = mid + 1
            else:
                hi = mid
        gaps[lo].append(d)
    order = []
    for g, gap in enumerate(gaps):
        order.extend(merge_sort(gap, session.probe))
        if g < len(spine):
            order.append(spine[g])
    return order
