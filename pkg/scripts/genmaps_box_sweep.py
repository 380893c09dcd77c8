"""Fraction of random graded maps satisfying the intersection condition as the coefficient box grows.

    python scripts/genmaps_box_sweep.py --l 2 --ks 1 2 --trials 500
"""

import argparse

from bmlab.conjectures import genmaps_sample


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--l", type=int, default=2)
    ap.add_argument("--ks", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--variables", type=int, default=2)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for box in (1, 2, 5, 10, 50):
        rep = genmaps_sample(args.l, args.ks, args.trials, args.seed, box, args.variables)
        print(f"box [-{box:>2}, {box:>2}]  fraction {rep.fraction:.4f}  "
              f"non-injective {rep.non_injective:>4}  intersection failures {rep.intersection_failures:>4}")


if __name__ == "__main__":
    main()
