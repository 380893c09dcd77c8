"""Torsion shape and Hard Lefschetz verdicts at both centers, tabulated per pair.

    python scripts/hl_survey.py matrices/b2.json --max-length 4 --lines 3
"""

import argparse
from collections import Counter

from bmlab.bmsheaf import build_bm
from bmlab.conjectures import check_pdimone_hl, interval_line
from bmlab.coxeter import Ball, load_system


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("matrix")
    ap.add_argument("--max-length", type=int, default=3)
    ap.add_argument("--lines", type=int, default=3, help="number of sampled lines per sheaf")
    args = ap.parse_args()

    ball = Ball(load_system(args.matrix), args.max_length)
    tally = Counter()
    for x in range(len(ball)):
        sh = build_bm(ball, x)
        lines = [interval_line(sh, seed) for seed in range(args.lines)]
        for y in range(len(sh.graph.vertices)):
            if y == sh.top:
                continue
            results = [check_pdimone_hl(sh, y, ln) for ln in lines]
            verdicts = {str(r.verdicts) for r in results}
            if len(verdicts) > 1:
                print(f"line dependence at ({ball.word(x)}, {sh.graph.word(y)}): {verdicts}")
            r = results[0]
            for kind, v in r.verdicts.items():
                tally[(kind, v["pdimone"] and v["hl"])] += 1
            print(f"{ball.word(x):<20} {sh.graph.word(y):<16} gap {sh.gap(y)}  "
                  f"{list(r.decomposition.pairs)!s:<24} shifted {r.verdicts['shifted']['hl']!s:<5} "
                  f"literal {r.verdicts['literal']['hl']}")
    for (kind, ok), n in sorted(tally.items()):
        print(f"{kind:<8} {'holds' if ok else 'fails'}: {n}")


if __name__ == "__main__":
    main()
