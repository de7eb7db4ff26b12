"""BackboneSort: quicksort-style refinement of an alternating backbone.

Meant for perfectly interleaved bipartite instances.  Off that promise the
run either gets stuck (buckets that cannot shrink) or hits the round cap,
both reported as ``PromiseViolated`` with the spend so far.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import BLUE, RED, BipartiteUnit, Instance, OracleSession
from .inversion_sort import HI, LO, Backbone, RunStats


class PromiseViolated(RuntimeError):
    def __init__(self, message: str, cost: Fraction, rounds: int):
        super().__init__(message)
        self.cost = cost
        self.rounds = rounds


@dataclass
class RoundState:
    backbone: Backbone
    round: int = 0

    @property
    def phase(self) -> str:
        return RED if self.round % 2 == 0 else BLUE

    @property
    def done(self) -> bool:
        return not any(self.backbone.buckets)


def initial_state(instance: Instance) -> RoundState:
    return RoundState(Backbone([LO, HI], [instance.reds(), instance.blues()]))


def _split(session: OracleSession, pivot: int, elems: list) -> tuple[list, list]:
    if not elems:
        return [], []
    mask = session.probe_many(pivot, elems)
    arr = np.asarray(elems)
    return arr[mask].tolist(), arr[~mask].tolist()


def is_stuck(state: RoundState) -> bool:
    """Every non-empty bucket has a real rep and empty neighbors, so no pivot can ever land."""
    reps, buckets = state.backbone.reps, state.backbone.buckets
    live = [i for i, b in enumerate(buckets) if b]
    if not live:
        return False
    return all(reps[i] not in (LO, HI) and not any(buckets[j] for j in (i - 1, i + 1) if 0 <= j < len(buckets))
               for i in live)


def run_round(state: RoundState, session: OracleSession, rng: random.Random) -> RoundState:
    """One red- or blue-pivoting round."""
    reps, buckets = state.backbone.reps, state.backbone.buckets
    active = state.phase
    size = len(reps)
    pivots: dict[int, int] = {}
    rest: dict[int, list] = {}
    for i in range(size):
        if state.backbone.color_at(i) == active and buckets[i]:
            k = rng.randrange(len(buckets[i]))
            pivots[i] = buckets[i][k]
            rest[i] = buckets[i][:k] + buckets[i][k + 1:]

    # split opposite buckets against the neighboring pivots (nearer = left first)
    low: dict[int, list] = {}  # below the left pivot
    high: dict[int, list] = {}  # above the right pivot
    mid: dict[int, list] = {}
    for j in range(size):
        if state.backbone.color_at(j) == active:
            continue
        elems = buckets[j]
        below_left: set = set()
        above_right: set = set()
        if j - 1 in pivots and elems:
            below_left = set(_split(session, pivots[j - 1], elems)[0])
        if j + 1 in pivots and elems:
            above_right = set(_split(session, pivots[j + 1], elems)[1])
        low[j] = [e for e in elems if e in below_left]
        high[j] = [e for e in elems if e in above_right]
        mid[j] = [e for e in elems if e not in below_left and e not in above_right]

    new_reps: list = []
    new_buckets: list = []
    for i in range(size):
        if state.backbone.color_at(i) != active:
            new_reps.append(reps[i])
            new_buckets.append(mid[i])
            continue
        if i not in pivots:
            new_reps.append(reps[i])
            new_buckets.append(buckets[i])
            continue
        p = pivots[i]
        left_piece = high.get(i - 1, [])
        right_piece = low.get(i + 1, [])
        if left_piece:  # rep_{i-1} < p < new < rep_i
            c = left_piece[rng.randrange(len(left_piece))]
            below, above = _split(session, c, rest[i])
            new_reps.extend((p, c, reps[i]))
            new_buckets.extend((below, [e for e in left_piece if e != c], above))
        elif right_piece:  # rep_i < new < p < rep_{i+1}
            a = right_piece[rng.randrange(len(right_piece))]
            below, above = _split(session, a, rest[i])
            new_reps.extend((reps[i], a, p))
            new_buckets.extend((below, [e for e in right_piece if e != a], above))
        elif reps[i] in (LO, HI):
            # nothing of the other color lies beyond p: on-promise p is the true extreme
            new_reps.append(p)
            new_buckets.append(rest[i])
        else:
            new_reps.append(reps[i])
            new_buckets.append(buckets[i])
    return RoundState(Backbone(new_reps, new_buckets), state.round + 1)


def run_backbone_sort(instance: Instance, seed: int = 0, session: OracleSession | None = None,
                      round_cap: int | None = None):
    """Sort an interleaved bipartite instance; returns (order, RunStats)."""
    if not isinstance(instance.cost_model, BipartiteUnit):
        raise ValueError("BackboneSort needs a BipartiteUnit instance")
    session = session if session is not None else OracleSession(instance)
    rng = random.Random(seed)
    cap = 10 * max(instance.n, 1) if round_cap is None else round_cap
    state = initial_state(instance)
    while not state.done:
        if is_stuck(state):
            raise PromiseViolated("buckets cannot shrink", session.total, state.round)
        if state.round >= cap:
            raise PromiseViolated(f"round cap {cap} reached", session.total, state.round)
        state = run_round(state, session, rng)
    order = [r for r in state.backbone.reps if r not in (LO, HI)]
    stats = RunStats(seed=seed, n=instance.n, size_vector=[1] * len(order), total_cost=session.total,
                     pivot_cost=session.total, rounds=state.round, probes=session.probes)
    return order, stats
