"""Build B(x) for every x up to a length bound and compare h(B(x)) with C'_x.

    python scripts/character_sweep.py matrices/h3.json --max-length 4
"""

import argparse
import time

from bmlab.bmsheaf import build_bm, graded_character
from bmlab.coxeter import Ball, load_system
from bmlab.hecke import kl_basis


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("matrix")
    ap.add_argument("--max-length", type=int, default=3)
    ap.add_argument("--cap-margin", type=int, default=4)
    args = ap.parse_args()

    ball = Ball(load_system(args.matrix), args.max_length)
    mismatches = 0
    for x in range(len(ball)):
        t0 = time.perf_counter()
        sh = build_bm(ball, x, args.cap_margin)
        ok = graded_character(sh) == kl_basis(ball, x).element
        mismatches += not ok
        ranks = max(s.rank for s in sh.stalks)
        print(f"{ball.word(x):<24} |[e,x]| = {len(sh.graph.vertices):>3}  max stalk rank {ranks}  "
              f"{'ok' if ok else 'MISMATCH'}  {time.perf_counter() - t0:6.2f}s")
    print(f"{len(ball)} elements, {mismatches} mismatches")


if __name__ == "__main__":
    main()
