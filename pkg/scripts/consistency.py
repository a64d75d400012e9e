"""Mean F1 by sample size for several network seeds and significance levels."""

import argparse
import time

import numpy as np

from mmblocal.experiment import ExperimentSpec, run_bench


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.01])
    ap.add_argument("--reps", type=int, default=50)
    ap.add_argument("--sizes", type=int, nargs="+", default=[1000, 5000])
    args = ap.parse_args()
    for alpha in args.alphas:
        for seed in args.seeds:
            spec = ExperimentSpec(
                n_nodes=35, mean_degree=2.0, n_latents=4, n_targets=3, min_target_degree=3,
                sizes=args.sizes, repetitions=args.reps, seed=seed, alpha=alpha,
            )
            t0 = time.perf_counter()
            recs = run_bench(spec)
            f1 = "  ".join(f"n={n}: {np.mean([r.f1 for r in recs if r.size == n]):.3f}" for n in args.sizes)
            print(f"alpha={alpha} seed={seed}  {f1}  ({time.perf_counter() - t0:.0f}s)", flush=True)


if __name__ == "__main__":
    main()
