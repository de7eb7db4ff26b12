"""Seeded instance families.

Every generator is deterministic in ``(kind, params, seed)``; element ids are
a seeded shuffle so that id order carries no information about rank order.
"""

from __future__ import annotations

import json
import math
import random
from fractions import Fraction

from .core import BLUE, RED, FourLevel, Instance, instance_from_colors


class BadParams(ValueError):
    pass


def _rng(kind: str, params: dict, seed: int) -> random.Random:
    return random.Random(f"{kind}|{json.dumps(params, sort_keys=True, default=str)}|{seed}")


def _ids(rng: random.Random, n: int) -> list[int]:
    ids = list(range(n))
    rng.shuffle(ids)
    return ids


def colors_from_sizes(sizes, first: str = RED) -> str:
    out, color = [], first
    for s in sizes:
        if s < 1:
            raise BadParams("stripe sizes must be positive")
        out.append(color * s)
        color = BLUE if color == RED else RED
    return "".join(out)


def balloon_sizes(n: int) -> list[int]:
    k = math.isqrt(n)
    if k < 1 or n - k < 1:
        raise BadParams("balloon needs n >= 2")
    return [n - k] + [1] * (2 * k) + [n - k]


def two_block(n: int, m: int, rng: random.Random) -> Instance:
    return instance_from_colors(RED * n + BLUE * m, ids=_ids(rng, n + m))


def interleaved(n: int, rng: random.Random) -> Instance:
    return instance_from_colors((RED + BLUE) * n, ids=_ids(rng, 2 * n))


def balloon(n: int, rng: random.Random) -> Instance:
    colors = colors_from_sizes(balloon_sizes(n))
    return instance_from_colors(colors, ids=_ids(rng, len(colors)))


def random_sizes(N: int, rng: random.Random, p_switch: float = 0.5) -> Instance:
    colors = [rng.choice((RED, BLUE))]
    for _ in range(N - 1):
        prev = colors[-1]
        colors.append((BLUE if prev == RED else RED) if rng.random() < p_switch else prev)
    return instance_from_colors("".join(colors), ids=_ids(rng, N))


def gk(n: int, rng: random.Random, case: int | None = None, cost=None) -> Instance:
    """Maximum-finding instance on n elements: reds 1 and 2 (ids 0, 1), blues 2..n-1.

    There are n - 1 cases: case 0 puts red 2 on top, then red 1, then the
    blues; case i >= 1 puts red 1 on top, then blue i + 1, then red 2, then
    the other blues.  Red-red costs ``cost`` (default n), red 1 to blue 0,
    red 2 to blue 1.  Blues are mutually incomparable, so there is no
    Hamiltonian promise.
    """
    if n < 3:
        raise BadParams("gk needs n >= 3")
    blues = list(range(2, n))
    if case is None:
        case = rng.randrange(n - 1)
    if not 0 <= case <= n - 2:
        raise BadParams("case out of range")
    rest = blues[:]
    rng.shuffle(rest)
    if case == 0:
        order = rest + [0, 1]
    else:
        special = blues[case - 1]
        rest.remove(special)
        order = rest + [1, special, 0]
    pairs = {(0, 1): 2}
    for b in blues:
        pairs[(0, b)] = 0
        pairs[(1, b)] = 1
    colors = [BLUE] * n
    colors[0] = colors[1] = RED
    F = Fraction(n if cost is None else cost)
    return Instance(n, tuple(order), "".join(colors), FourLevel(F, pairs), False)


def default_F(n: int) -> Fraction:
    """Smallest integer F with F^4 >= n^3."""
    f = max(1, math.ceil(n ** 0.75))
    while f**4 < n**3:
        f += 1
    while f > 1 and (f - 1) ** 4 >= n**3:
        f -= 1
    return Fraction(f)


def four_level(n: int, k1: int, kF: int, rng: random.Random, F=None,
               p0: float = 0.05, p1: float = 0.3, pF: float = 0.05) -> Instance:
    """Planted Hamiltonian with k1 cost-1 and kF cost-F edges, the rest cost 0.

    Other pairs are salted independently: cost 0, 1, F with the given
    probabilities, forbidden otherwise.
    """
    if n < 2 or k1 < 0 or kF < 0 or k1 + kF > n - 1:
        raise BadParams("need n >= 2 and 0 <= k1 + kF <= n - 1")
    if k1 + kF < 1:
        raise BadParams("at least one Hamiltonian edge must be priced")
    if min(p0, p1, pF) < 0 or p0 + p1 + pF > 1:
        raise BadParams("bad salting probabilities")
    F = default_F(n) if F is None else Fraction(F)
    order = _ids(rng, n)
    slots = list(range(n - 1))
    rng.shuffle(slots)
    ham_class = [0] * (n - 1)
    for s in slots[:k1]:
        ham_class[s] = 1
    for s in slots[k1:k1 + kF]:
        ham_class[s] = 2
    pairs = {}
    for i in range(n - 1):
        a, b = order[i], order[i + 1]
        pairs[(min(a, b), max(a, b))] = ham_class[i]
    for i in range(n):
        for j in range(i + 2, n):
            x = rng.random()
            if x < p0:
                c = 0
            elif x < p0 + p1:
                c = 1
            elif x < p0 + p1 + pF:
                c = 2
            else:
                continue
            a, b = order[i], order[j]
            pairs[(min(a, b), max(a, b))] = c
    return Instance(n, tuple(order), RED * n, FourLevel(F, pairs), True)


KINDS = ("two_block", "interleaved", "balloon", "random_sizes", "sizes", "gk", "four_level")


def generate_instance(kind: str, params: dict, seed: int) -> Instance:
    rng = _rng(kind, params, seed)
    p = dict(params)
    try:
        if kind == "two_block":
            return two_block(int(p["n"]), int(p.get("m", p["n"])), rng)
        if kind == "interleaved":
            return interleaved(int(p["n"]), rng)
        if kind == "balloon":
            return balloon(int(p["n"]), rng)
        if kind == "random_sizes":
            return random_sizes(int(p["N"]), rng, float(p.get("p_switch", 0.5)))
        if kind == "sizes":
            colors = colors_from_sizes(p["sizes"], p.get("first", RED))
            return instance_from_colors(colors, ids=_ids(rng, len(colors)))
        if kind == "gk":
            return gk(int(p["n"]), rng, p.get("case"), p.get("cost"))
        if kind == "four_level":
            n = int(p["n"])
            return four_level(n, _count(p.get("k1", 1), n), _count(p.get("kF", 0), n), rng, p.get("F"),
                              float(p.get("p0", 0.05)), float(p.get("p1", 0.3)), float(p.get("pF", 0.05)))
    except KeyError as exc:
        raise BadParams(f"{kind}: missing parameter {exc}") from None
    raise BadParams(f"unknown kind {kind!r}")


def _count(value, n: int) -> int:
    """Edge counts may be given as integers or as strings 'sqrt' / 'n/4'."""
    if isinstance(value, str):
        table = {"sqrt": math.isqrt(n), "n/4": n // 4, "n/2": n // 2}
        if value not in table:
            raise BadParams(f"unknown count {value!r}")
        return max(1, table[value])
    return int(value)
