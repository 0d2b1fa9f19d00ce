#!/usr/bin/env python3
"""Radius and duality report for levels k = 1..K of the construction."""

import argparse
import sys
import warnings

from shadowlab import construction


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--max-k", type=int, default=8)
    p.add_argument("--angle-samples", type=int, default=1024)
    args = p.parse_args(argv)
    warnings.simplefilter("ignore")
    for k in range(1, args.max_k + 1):
        rep = construction.verify_radii(k, args.angle_samples)
        failed = [n for n, ok in rep.checks.items() if not ok]
        print(f"k={k:2d}  support in [{rep.inner_support_min:.12f}, {rep.outer_support_max:.12f}]"
              f"  circumradius {rep.polygon_outer:.12f}  failed: {', '.join(failed) or 'none'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
