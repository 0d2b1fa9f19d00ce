#!/usr/bin/env python3
"""Hull sizes of Gaussian-perturbed points on the unit circle, with the
fitted log-log slope of mean edges against sigma."""

import argparse
import sys

import numpy as np

from shadowlab import smoothed2d
from shadowlab.randomdist import derive_seed


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--layout", choices=("circle", "single_point"), default="circle")
    p.add_argument("--sigma-min", type=float, default=1e-4)
    p.add_argument("--sigma-max", type=float, default=1e-1)
    p.add_argument("--sigma-count", type=int, default=7)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    make = smoothed2d.Layout2D.circle if args.layout == "circle" else smoothed2d.Layout2D.single_point
    layout = make(args.n)
    sigmas = np.logspace(np.log10(args.sigma_min), np.log10(args.sigma_max), args.sigma_count)
    means = []
    for s in sigmas:
        summary = smoothed2d.run_2d_experiment(layout, float(s), args.trials, derive_seed(args.seed, f"2d:{s!r}"))
        means.append(summary.mean_edges)
        print(f"sigma={s:10.4g}  mean edges={summary.mean_edges:8.1f}  std={summary.std_edges:6.1f}")
    slope = np.polyfit(np.log(sigmas), np.log(means), 1)[0]
    print(f"log-log slope {slope:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
