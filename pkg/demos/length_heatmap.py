"""Mixing time over a grid of the two edge lengths, written as CSV.

The sweep is resumable: run it, interrupt it, run it again and only the
missing cells are computed.  Each CSV row is ``x, y, tmix`` and can be fed
straight to any heatmap tool.
"""

import argparse
import logging

from ringmix import WalkParams
from ringmix.harness import export_csv, sweep_lengths


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=120)
    ap.add_argument("--step", type=int, default=6)
    ap.add_argument("--store", default="lengths.jsonl")
    ap.add_argument("--csv", default="lengths.csv")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO)

    recs = sweep_lengths(args.n, WalkParams(), step=args.step, store_path=args.store, threads=args.threads)
    export_csv(recs, args.csv)
    best = min((r for r in recs if r.tmix is not None), key=lambda r: r.tmix)
    worst = max((r for r in recs if r.tmix is not None), key=lambda r: r.tmix)
    print(f"{len(recs)} cells -> {args.csv}")
    print(f"fastest: lengths ({best.x}, {best.y}) t_mix={best.tmix}")
    print(f"slowest: lengths ({worst.x}, {worst.y}) t_mix={worst.tmix}")


if __name__ == "__main__":
    main()
