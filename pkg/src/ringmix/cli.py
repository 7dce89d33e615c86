"""Command-line entry point: ``ringmix <subcommand> [options]``.

Exit codes: 0 success, 2 invalid configuration, 3 when a campaign (or a
single mixing run) is dominated by chains that did not mix within budget.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys

import numpy as np

from . import harness, spread, walker
from .errors import CampaignError, NotMixedError, RingmixError
from .graph import check_B1, derive_seed, from_spec, make_rng, sample_instance, serialize
from .kernel import DEFAULT_A, DEFAULT_P, DEFAULT_Q, WalkParams, transition_matrix
from .mixing import distance_profile

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_NOT_MIXED = 0, 2, 3


def _int_list(text):
    return [int(v) for v in text.replace(" ", "").split(",") if v]


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="base seed (instance draw, trials, placements)")
    p.add_argument("--threads", type=int, default=1, help="worker threads; never changes results")
    p.add_argument("--out", help="output file (stdout when omitted, where meaningful)")
    p.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _params(p):
    p.add_argument("--p", type=float, default=DEFAULT_P)
    p.add_argument("--q", type=float, default=DEFAULT_Q)
    p.add_argument("--a", type=float, default=DEFAULT_A)


def _instance_args(p):
    p.add_argument("--instance", help="instance text, e.g. 'n=12 k=1 hubs=2,7 match=1:2'")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int, default=1)


def _mix_args(p, starts="single:0"):
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--starts", default=starts, help="all | hubs | single:V")
    p.add_argument("--tmax", type=int, default=None)


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="ringmix", description="Mixing of non-reversible walks on perturbed cycles.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[common], help="build an instance and print its canonical text")
    _instance_args(p)

    p = sub.add_parser("mix", parents=[common], help="distance profile and mixing time of one instance")
    _instance_args(p)
    _params(p)
    _mix_args(p, starts="auto")

    p = sub.add_parser("track", parents=[common], help="simulate tracks and report their statistics")
    _instance_args(p)
    _params(p)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--x0", type=int, default=0)

    p = sub.add_parser("spread", parents=[common], help="spread statistics of f_l over random lengths")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--prime-only", action="store_true", help="require prime n and report the exact expectation")

    p = sub.add_parser("sweep-lengths", parents=[common], help="heatmap over both edge lengths (k=2)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--step", type=int, default=1)
    p.add_argument("--store", help="resumable JSON-lines store")
    _params(p)
    _mix_args(p)

    p = sub.add_parser("sweep-positions", parents=[common], help="heatmap over edge positions, lengths fixed")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lengths", type=_int_list, required=True)
    p.add_argument("--step", type=int, default=None)
    p.add_argument("--store")
    _params(p)
    _mix_args(p)

    p = sub.add_parser("sorted", parents=[common], help="sorted scaled curves from full length sweeps")
    p.add_argument("--n-list", type=_int_list, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--step", type=int, default=1)
    p.add_argument("--reference-n", type=int, default=None)
    p.add_argument("--store-dir")
    _params(p)
    _mix_args(p)

    p = sub.add_parser("exponent", parents=[common], help="fit the mixing-time exponent over n")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--n-list", type=_int_list, required=True)
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--store")
    _params(p)
    _mix_args(p)

    p = sub.add_parser("verify", parents=[common], help="quick self-checks of the core identities")
    _params(p)
    return parser


def _walk_params(args):
    return WalkParams(args.p, args.q, args.a)


def _instance(args):
    if args.instance:
        return from_spec(args.instance)
    if args.n is None:
        raise RingmixError("give --instance or --n (with --k and --seed)")
    return sample_instance(args.n, args.k, args.seed)


class _Output:
    def __init__(self, path):
        self.path = path

    def __enter__(self):
        self.fh = open(self.path, "w", newline="") if self.path else sys.stdout
        return self.fh

    def __exit__(self, *exc):
        if self.path:
            self.fh.close()


def _emit_records(args, records):
    with _Output(args.out) as fh:
        if args.format == "csv":
            writer = csv.writer(fh)
            writer.writerow(["x", "y", "tmix"])
            for r in sorted(records, key=lambda r: (r.x if r.x is not None else -1, r.y if r.y is not None else -1)):
                writer.writerow(["" if r.x is None else r.x, "" if r.y is None else r.y,
                                 "" if r.tmix is None else r.tmix])
        else:
            for line in harness.canonical_lines(records):
                fh.write(line + "\n")


def _not_mixed_dominated(records):
    computed = [r for r in records if r.flag is None]
    return bool(computed) and 2 * sum(r.not_mixed for r in computed) > len(computed)


def cmd_build(args):
    g = _instance(args)
    info = {"instance": serialize(g), "n": g.n, "k": g.k, "hubs": list(g.hubs), "arcs": list(g.arcs),
            "lengths": list(g.lengths), "B1": check_B1(g)}
    with _Output(args.out) as fh:
        fh.write((json.dumps(info) if args.format == "jsonl" else serialize(g)) + "\n")
    return EXIT_OK


def cmd_mix(args):
    g = _instance(args)
    w = _walk_params(args)
    try:
        prof = distance_profile(g, w, starts=args.starts, t_max=args.tmax, eps=[args.eps])
        result = {"instance": prof.instance, "starts": prof.starts, "eps": args.eps,
                  "tmix": prof.tmix[args.eps], "not_mixed": False}
        code = EXIT_OK
    except NotMixedError as exc:
        prof = exc.profile
        result = {"instance": prof.instance, "starts": prof.starts, "eps": args.eps,
                  "tmix": None, "not_mixed": True, "t_max": exc.t_max, "last_d": exc.last_d}
        code = EXIT_NOT_MIXED
    if args.out:
        prof.to_csv(args.out)
    print(json.dumps(result))
    return code


def cmd_track(args):
    g = _instance(args)
    w = _walk_params(args)
    with _Output(args.out) as fh:
        for stats in walker.run_tracks(g, w, args.x0, args.L, args.trials, args.seed):
            fh.write(json.dumps(stats.to_dict()) + "\n")
    return EXIT_OK


def cmd_spread(args):
    n, k = args.n, args.k
    if args.prime_only and not spread.is_prime(n):
        raise RingmixError(f"--prime-only given but n={n} is composite")
    m = spread.default_m(n, k) if args.m is None else args.m
    expected = spread.expected_window_hits(n, k, m, args.alpha) if spread.is_prime(n) else None
    rng = make_rng(args.seed)
    rows = []
    for i in range(args.samples):
        l = rng.integers(0, n, size=k)
        row = {"sample": i, **spread.spread_report(l, n, m, alpha=args.alpha).row()}
        row["expected_window_hits"] = expected
        rows.append(row)
    with _Output(args.out) as fh:
        if args.format == "csv":
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
        else:
            for row in rows:
                fh.write(json.dumps(row) + "\n")
    hits = np.array([r["window_hits"] for r in rows])
    logger.info("mean window hits %.4f (expected %s)", hits.mean(), expected)
    return EXIT_OK


def cmd_sweep_lengths(args):
    recs = harness.sweep_lengths(args.n, _walk_params(args), args.eps, args.k, args.seed, args.step,
                                 args.starts, args.store, args.threads, args.tmax)
    _emit_records(args, recs)
    return EXIT_NOT_MIXED if _not_mixed_dominated(recs) else EXIT_OK


def cmd_sweep_positions(args):
    recs = harness.sweep_positions(args.n, args.lengths, _walk_params(args), args.eps, args.step,
                                   args.starts, args.store, args.threads, args.tmax)
    _emit_records(args, recs)
    return EXIT_NOT_MIXED if _not_mixed_dominated(recs) else EXIT_OK


def cmd_sorted(args):
    curves = harness.sorted_scaled(args.n_list, _walk_params(args), args.eps, args.k, args.seed, args.step,
                                   args.starts, args.reference_n, args.store_dir, args.threads, args.tmax)
    ns = sorted(curves.curves)
    with _Output(args.out) as fh:
        if args.format == "csv":
            writer = csv.writer(fh)
            header = ["quantile"] + [f"scaled_{n}" for n in ns] + [f"normalized_{n}" for n in ns]
            writer.writerow(header)
            for i, qv in enumerate(curves.quantiles):
                writer.writerow([f"{qv:.4f}"] + [repr(float(curves.curves[n][i])) for n in ns]
                                + [repr(float(curves.normalized[n][i])) for n in ns])
        else:
            for n in ns:
                fh.write(json.dumps({"n": n, "exponent": curves.exponent,
                                     "quantiles": curves.quantiles.tolist(),
                                     "scaled": curves.curves[n].tolist(),
                                     "normalized": curves.normalized[n].tolist()}) + "\n")
    return EXIT_OK


def cmd_exponent(args):
    try:
        summary = harness.exponent_campaign(args.k, args.n_list, args.instances, _walk_params(args), args.eps,
                                            args.seed, args.starts, args.store, args.threads, args.tmax)
    except CampaignError as exc:
        print(json.dumps({"error": str(exc)}))
        return EXIT_NOT_MIXED
    result = summary.to_dict()
    result["scaling_sanity"] = harness.scaling_sanity(summary.n_list, summary.medians, args.k)
    with _Output(args.out) as fh:
        fh.write(json.dumps(result) + "\n")
    return EXIT_OK


def cmd_verify(args):
    w = _walk_params(args)
    checks = []
    rng = make_rng(args.seed)
    worst = 0.0
    for i in range(20):
        g = sample_instance(int(rng.integers(8, 400)), int(rng.integers(0, 4)), derive_seed(args.seed, i))
        P = transition_matrix(g, w)
        worst = max(worst, np.abs(P.sum(axis=0) - 1).max(), np.abs(P.sum(axis=1) - 1).max())
    checks.append(("rows and columns sum to 1", worst < 1e-12, f"max dev {worst:.2e}"))
    pg, pj = walker.pg_closed_form(w)
    og, oj = walker.absorption_oracle(w, 200)
    dev = max(abs(pg - og), abs(pj - oj))
    checks.append(("absorption oracle matches closed form", dev < 1e-8, f"dev {dev:.2e}"))
    g = sample_instance(4000, 1, args.seed)
    bad = total = 0
    if check_B1(g):
        L = int(g.n ** 1.5 / 4)
        for stats in walker.run_tracks(g, w, 0, L, 50, args.seed):
            if stats.B2_held:
                total += 1
                bad += walker.predicted_endpoint(g, 0, L, stats.y) != stats.endpoint
    checks.append(("endpoint identity on tracks", bad == 0, f"{bad} violations in {total} tracks"))
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
    return EXIT_OK if all(ok for _, ok, _ in checks) else 1


COMMANDS = {
    "build": cmd_build, "mix": cmd_mix, "track": cmd_track, "spread": cmd_spread,
    "sweep-lengths": cmd_sweep_lengths, "sweep-positions": cmd_sweep_positions,
    "sorted": cmd_sorted, "exponent": cmd_exponent, "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (RingmixError, ValueError) as exc:
        print(f"ringmix: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
