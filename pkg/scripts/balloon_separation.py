"""Mean cost of BackboneSort and InversionSort on balloon instances, with log-log slopes.

usage: python3 scripts/balloon_separation.py [--seeds 50] [--sizes 256 1024 4096]
"""

import argparse
import statistics

from pricedsort.backbone_sort import PromiseViolated, run_backbone_sort
from pricedsort.bench import loglog_slope
from pricedsort.core import OracleSession
from pricedsort.generators import generate_instance
from pricedsort.inversion_sort import run_bipartite


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seeds", type=int, default=50)
    parser.add_argument("--sizes", type=int, nargs="+", default=[256, 1024, 4096])
    args = parser.parse_args()
    backbone, inversion = [], []
    for n in args.sizes:
        b, i = [], []
        for seed in range(args.seeds):
            inst = generate_instance("balloon", {"n": n}, seed)
            try:
                _, stats = run_backbone_sort(inst, seed, OracleSession(inst, record_pairs=False))
                b.append(float(stats.total_cost))
            except PromiseViolated as exc:
                b.append(float(exc.cost))
            _, stats = run_bipartite(inst, seed, OracleSession(inst, record_pairs=False))
            i.append(float(stats.total_cost))
        backbone.append(statistics.fmean(b))
        inversion.append(statistics.fmean(i))
        print(f"n={n:5d}  BackboneSort {backbone[-1]:10.1f}  InversionSort {inversion[-1]:10.1f}")
    print(f"slopes: BackboneSort {loglog_slope(args.sizes, backbone):.3f}, "
          f"InversionSort {loglog_slope(args.sizes, inversion):.3f}")


if __name__ == "__main__":
    main()
