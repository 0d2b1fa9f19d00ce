#!/usr/bin/env python3
"""Shadow sizes of the perturbed lower-bound construction.

Writes the per-trial CSV and prints the median count per sigma with the
mid-regime log-log slope.  Defaults follow the k=10 reference run.
"""

import argparse
import math
import sys

import numpy as np

from shadowlab import experiments


def summarize(rows, k):
    sigmas = sorted({r["sigma"] for r in rows if r["k"] == k}, reverse=True)
    med = []
    for s in sigmas:
        counts = [r["shadow_count"] for r in rows if r["k"] == k and r["sigma"] == s and r["status"] == "ok"]
        med.append(float(np.median(counts)) if counts else math.nan)
    target = 2 ** (k + 1)
    print(f"k={k}  (2^(k+1) = {target})")
    for s, m in zip(sigmas, med):
        print(f"  sigma={s:10.4g}  median={m:8.1f}")
    lo = next((i for i, m in enumerate(med) if m >= target / 16), None)
    hi = next((i for i, m in enumerate(med) if m >= target), len(med))
    if lo is not None and hi - lo >= 3:
        slope = np.polyfit(np.log(sigmas[lo:hi]), np.log(med[lo:hi]), 1)[0]
        print(f"  mid-regime slope {slope:.3f} over sigma {sigmas[lo]:.3g}..{sigmas[hi - 1]:.3g}")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--k", type=int, nargs="+", default=[10])
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--sigma-count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=experiments.METHODS, default="sweep")
    p.add_argument("--full-rows", action="store_true", help="keep the two bound rows on s (4k+7 rows)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="lb_results.csv")
    args = p.parse_args(argv)

    cfg = experiments.ExperimentConfig(k_list=tuple(args.k), trials=args.trials, sigma_count=args.sigma_count,
                                       master_seed=args.seed, method=args.method,
                                       drop_s_bounds=not args.full_rows, workers=args.workers)
    rows = experiments.run_lb_grid(cfg)
    experiments.write_csv(rows, experiments.LB_COLUMNS, args.out)
    for k in args.k:
        summarize(rows, k)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
