"""Query counts of the local driver against a global PC-style skeleton.

Oracle backend, seeded random instances.  Prints the win rate and ratio
quantiles overall and by graph size, for each R3 reading.
"""

import argparse
from collections import defaultdict

import numpy as np

from mmblocal.ci import OracleCI
from mmblocal.driver import run_mmb_by_mmb
from mmblocal.graph import pag_from_mag
from mmblocal.local import pc_skeleton
from mmblocal.simgen import random_instance


def _at(g, t):
    return {v: (g.mark(v, t), g.mark(t, v)) for v in g.neighbors(t)} if t in g else {}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--min-nodes", type=int, default=8)
    ap.add_argument("--max-nodes", type=int, default=15)
    args = ap.parse_args()
    for mode in ("sound", "arrowhead"):
        ratios, correct = [], 0
        by_size = defaultdict(list)
        for seed in range(args.n):
            inst = random_instance(seed, n_range=(args.min_nodes, args.max_nodes))
            b = OracleCI(inst.dag, inst.latents)
            r = run_mmb_by_mmb(b, None, inst.target, r3=mode)
            correct += _at(r.p, inst.target) == _at(pag_from_mag(b.mag), inst.target)
            g = OracleCI(inst.dag, inst.latents)
            pc_skeleton(g)
            ratio = b.n_tests / max(g.n_tests, 1)
            ratios.append(ratio)
            by_size[len(inst.observed)].append(ratio)
        ratios = np.array(ratios)
        print(f"[{mode}] correct {correct}/{args.n}, fewer tests {(ratios < 1).sum()}/{args.n}, "
              f"ratio quartiles {np.percentile(ratios, [25, 50, 75]).round(2).tolist()}")
        for n in sorted(by_size):
            xs = np.array(by_size[n])
            print(f"  {n:3d} observed: {len(xs):3d} instances, win {np.mean(xs < 1):.2f}, median {np.median(xs):.2f}")


if __name__ == "__main__":
    main()
