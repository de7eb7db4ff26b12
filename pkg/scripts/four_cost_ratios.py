"""Competitive ratios of the four-cost dispatcher across the planted-Hamiltonian suite.

usage: python3 scripts/four_cost_ratios.py [--seeds 3] [--sizes 64 128 256]
"""

import argparse
import math

from pricedsort.generalized import sort_four_costs
from pricedsort.generators import generate_instance

SUITE = [(1, 0), ("sqrt", 0), ("n/4", 0), (0, 1), ("sqrt", 1), (1, 2)]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seeds", type=int, default=3)
    parser.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    args = parser.parse_args()
    for n in args.sizes:
        scale = n**0.75 * math.log2(n)
        for k1, kF in SUITE:
            for seed in range(args.seeds):
                inst = generate_instance("four_level", {"n": n, "k1": k1, "kF": kF}, seed)
                res = sort_four_costs(inst)
                s = res.stats
                print(f"n={n:4d} k1={s['k1']:3d} kF={s['kF']} w0={s['w0']:3d} w01={s['w01']:3d} "
                      f"ratio={float(res.ratio):7.2f} ratio/(n^.75 log n)={float(res.ratio) / scale:.3f} "
                      f"winner={res.winner}")


if __name__ == "__main__":
    main()
