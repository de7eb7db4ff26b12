"""Lower bounds and brute-force optimal baselines for bipartite instances.

``brute_force_opt`` is a zero-error deterministic minimax over query trees,
so it upper-bounds the optimum of algorithms allowed a constant error.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .core import BLUE, RED, Instance, stripes_of

INF = math.inf  # marker for a degenerate inversion bound


class TooLarge(ValueError):
    pass


def _sizes_colors(instance: Instance) -> tuple[list[int], list[str]]:
    dec = stripes_of(instance)
    return list(dec.size_vector), [instance.colors[s[0]] for s in dec.stripes]


def verification_lb(instance: Instance) -> int:
    """Size of the transitive reduction: products of adjacent stripe sizes."""
    sizes, _ = _sizes_colors(instance)
    return sum(a * b for a, b in zip(sizes, sizes[1:]))


def _pair_counts(sizes, colors) -> tuple[int, int, int]:
    """(#reds, #blues, #pairs with the red below the blue)."""
    reds = blues = below = 0
    for s, c in zip(sizes, colors):
        if c == RED:
            reds += s
        else:
            below += reds * s
            blues += s
    return reds, blues, below


def _inversion_value(reds: int, blues: int, below: int):
    lesser = min(below, reds * blues - below)
    return INF if lesser == 0 else Fraction(reds * blues, lesser)


def inversion_lb(instance: Instance):
    """nm over the minority orientation count; ``INF`` if one orientation is absent."""
    sizes, colors = _sizes_colors(instance)
    return _inversion_value(*_pair_counts(sizes, colors))


@dataclass
class LowerBoundReport:
    c_v: int
    c_i: object  # Fraction or INF
    decomposition: Fraction
    windows: list = field(default_factory=list)  # inclusive stripe index ranges

    def to_row(self) -> dict:
        return {
            "c_v": self.c_v,
            "c_i": "inf" if self.c_i == INF else str(self.c_i),
            "decomp_lb": str(self.decomposition),
            "windows": ";".join(f"{a}-{b}" for a, b in self.windows),
        }


def window_estimate(sizes, colors, a: int, b: int) -> Fraction:
    """max(C_V, C_I) / 32 for stripes a..b; a degenerate C_I is ignored."""
    sub_s, sub_c = sizes[a:b + 1], colors[a:b + 1]
    cv = sum(x * y for x, y in zip(sub_s, sub_s[1:]))
    ci = _inversion_value(*_pair_counts(sub_s, sub_c))
    best = Fraction(cv) if ci == INF else max(Fraction(cv), ci)
    return best / 32


def decomposition_lb_sizes(sizes, colors) -> tuple[Fraction, list]:
    """Best sum of window estimates over non-overlapping stripe windows."""
    k = len(sizes)
    s = np.asarray(sizes, dtype=np.float64)
    red = np.asarray([c == RED for c in colors])
    best = np.zeros(k + 1)  # best[j]: optimum over the first j stripes
    cand = np.full(k, -1.0)  # best[a] + est(a, b) maximized over a, for window end b
    start = np.full(k, -1)
    take = np.full(k + 1, -1)  # take[j] = a when stripes a..j-1 form the last window
    for a in range(k):
        if a:
            if cand[a - 1] > best[a - 1]:
                best[a], take[a] = cand[a - 1], start[a - 1]
            else:
                best[a] = best[a - 1]
        seg_s, seg_r = s[a:], red[a:]
        red_s = np.where(seg_r, seg_s, 0.0)
        reds = np.cumsum(red_s)
        blues = np.cumsum(seg_s - red_s)
        below = np.cumsum(np.where(seg_r, 0.0, seg_s * (reds - red_s)))
        cv = np.concatenate(([0.0], np.cumsum(seg_s[1:] * seg_s[:-1])))
        lesser = np.minimum(below, reds * blues - below)
        ci = np.divide(reds * blues, lesser, out=np.zeros_like(lesser), where=lesser > 0)
        value = best[a] + np.maximum(cv, ci) / 32
        better = value > cand[a:]
        cand[a:] = np.where(better, value, cand[a:])
        start[a:] = np.where(better, a, start[a:])
    if k and cand[k - 1] > best[k - 1]:
        take[k] = start[k - 1]
    windows = []
    j = k
    while j > 0:
        if take[j] >= 0:
            windows.append((int(take[j]), j - 1))
            j = int(take[j])
        else:
            j -= 1
    windows.reverse()
    exact = sum((window_estimate(sizes, colors, a, b) for a, b in windows), Fraction(0))
    return exact, windows


def decomposition_lb(instance: Instance) -> tuple[Fraction, list]:
    return decomposition_lb_sizes(*_sizes_colors(instance))


def lower_bound_report(instance: Instance) -> LowerBoundReport:
    value, windows = decomposition_lb(instance)
    return LowerBoundReport(verification_lb(instance), inversion_lb(instance), value, windows)


# --------------------------------------------------------------------------
# brute-force optimum


@dataclass
class MiniOptResult:
    cost: int  # optimal worst-case probe count over the neighborhood
    depth: int  # decision-tree depth; equals cost under unit costs
    neighborhood: int  # number of distinct instances enumerated


SIZE_CAP = 6


def _orientation(ranked: list, reds: list, blues: list) -> int:
    """Bit i*len(blues)+j set iff reds[i] lies below blues[j] in the ranked list."""
    pos = {x: i for i, x in enumerate(ranked)}
    bits = 0
    m = len(blues)
    for i, r in enumerate(reds):
        for j, b in enumerate(blues):
            if pos[r] < pos[b]:
                bits |= 1 << (i * m + j)
    return bits


def _acyclic(bits: int, nr: int, nb: int) -> bool:
    # in-neighbor masks over vertices 0..nr-1 (reds) and nr..nr+nb-1 (blues)
    into = [0] * (nr + nb)
    for i in range(nr):
        for j in range(nb):
            if (bits >> (i * nb + j)) & 1:
                into[nr + j] |= 1 << i
            else:
                into[i] |= 1 << (nr + j)
    alive = (1 << (nr + nb)) - 1
    while alive:
        src = [v for v in range(nr + nb) if (alive >> v) & 1 and not into[v] & alive]
        if not src:
            return False
        for v in src:
            alive &= ~(1 << v)
    return True


def _essential_bits(ranked: list, colors: str, reds: list, blues: list) -> list[int]:
    """Bit positions of the reduction edges (adjacent stripes)."""
    ri = {r: i for i, r in enumerate(reds)}
    bi = {b: j for j, b in enumerate(blues)}
    m = len(blues)
    stripes = []
    for x in ranked:
        if stripes and colors[stripes[-1][0]] == colors[x]:
            stripes[-1].append(x)
        else:
            stripes.append([x])
    out = []
    for lo, hi in zip(stripes, stripes[1:]):
        for x in lo:
            for y in hi:
                r, b = (x, y) if colors[x] == RED else (y, x)
                out.append(ri[r] * m + bi[b])
    return out


def neighborhood(instance: Instance, kind: str = "N_AE") -> set[int]:
    """Orientations of the red-blue pairs reachable from the instance.

    ``N_A`` relabels elements within each color class; ``N_AE`` additionally
    flips any subset of essential edges whose result stays acyclic.
    """
    if kind not in ("N_A", "N_AE"):
        raise ValueError("neighborhood must be N_A or N_AE")
    if instance.n > SIZE_CAP:
        raise TooLarge(f"brute force limited to {SIZE_CAP} elements")
    reds, blues = list(instance.reds()), list(instance.blues())
    pattern = instance.ordered_colors()
    members = set()
    relabeled = []
    for pr in itertools.permutations(reds):
        for pb in itertools.permutations(blues):
            it_r, it_b = iter(pr), iter(pb)
            ranked = [next(it_r) if c == RED else next(it_b) for c in pattern]
            bits = _orientation(ranked, reds, blues)
            if bits not in members:
                members.add(bits)
                relabeled.append(ranked)
    if kind == "N_A":
        return members
    out = set(members)
    for ranked in relabeled:
        base = _orientation(ranked, reds, blues)
        ess = _essential_bits(ranked, instance.colors, reds, blues)
        for r in range(1, len(ess) + 1):
            for subset in itertools.combinations(ess, r):
                flipped = base
                for bit in subset:
                    flipped ^= 1 << bit
                if flipped not in out and _acyclic(flipped, len(reds), len(blues)):
                    out.add(flipped)
    return out


def brute_force_opt(instance: Instance, kind: str = "N_AE") -> MiniOptResult:
    """Minimum worst-case number of probes that identifies the instance within its neighborhood."""
    cands = neighborhood(instance, kind)
    npairs = len(instance.reds()) * len(instance.blues())

    @lru_cache(maxsize=None)
    def solve(state: frozenset) -> int:
        if len(state) <= 1:
            return 0
        best = math.inf
        for q in range(npairs):
            ones = frozenset(x for x in state if (x >> q) & 1)
            if not ones or len(ones) == len(state):
                continue
            worst = 1 + max(solve(ones), solve(state - ones))
            best = min(best, worst)
        return best

    cost = solve(frozenset(cands))
    return MiniOptResult(cost, cost, len(cands))


def all_size_vectors(max_elements: int = SIZE_CAP):
    """Every stripe size vector with both colors present and at most max_elements elements."""
    for total in range(2, max_elements + 1):
        for cuts in range(1, total):
            for split in itertools.combinations(range(1, total), cuts):
                bounds = (0,) + split + (total,)
                yield [b - a for a, b in zip(bounds, bounds[1:])]


# --------------------------------------------------------------------------
# maximum-finding example


def gk_expected_ratios(n: int) -> tuple[Fraction, Fraction]:
    """Expected ratios on the n-case maximum-finding distribution.

    Probing the red-red edge costs n in every case: ratio 1 in the first case
    and n in the other n - 1.  Skipping it costs i when the special blue is
    the i-th probed and n - 1 when there is none, each counted as the ratio.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    probe = Fraction(1, n) + (n - 1)
    skip = Fraction(sum(range(1, n)) + (n - 1), n)
    return probe, skip
