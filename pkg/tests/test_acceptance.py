"""Acceptance criteria, one test each; every test records a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or ``python3 tests/test_acceptance.py`` (lines printed as they finish).
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from oracles import dense_operator, dense_profile
from ringmix import (CampaignError, WalkParams, absorption_oracle, check_B1, distance_profile, estimate_decisions,
                     expected_window_hits, pg_closed_form, sample_instance, transition_matrix)
from ringmix.graph import derive_seed, make_rng
from ringmix.harness import (canonical_lines, exponent_campaign, placement_batch, resume, sorted_scaled,
                             sweep_lengths)
from ringmix.spread import window_hits
from ringmix.walker import predicted_endpoint, run_tracks, sample_tau1

W = WalkParams(0.5, 0.25, 0.25)


def record(number, ok, detail):
    ACCEPTANCE_LINES.append((number, bool(ok), detail))
    print(f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {detail}", flush=True)
    assert ok, detail


def random_params(rng):
    q = rng.uniform(0, 0.45)
    p = rng.uniform(q + 1e-3, 1 - q)
    return WalkParams(p, q, rng.uniform(0, 1 - p - q))


def b1_instance(n, k, seed):
    for s in range(1000):
        g = sample_instance(n, k, derive_seed(seed, s))
        if check_B1(g):
            return g
    raise AssertionError(f"no B1 instance for n={n}, k={k}")


def test_criterion_01_kernel_doubly_stochastic():
    t0 = time.perf_counter()
    rng = make_rng(101)
    worst = 0.0
    for i in range(100):
        n = int(rng.integers(3, 10_001))
        k = int(rng.integers(0, min(6, n // 2) + 1))
        P = transition_matrix(sample_instance(n, k, derive_seed(101, i)), random_params(rng))
        worst = max(worst, np.abs(np.asarray(P.sum(axis=0)) - 1).max(), np.abs(np.asarray(P.sum(axis=1)) - 1).max())
    dt = time.perf_counter() - t0
    record(1, worst <= 1e-12 and dt < 10, f"100 instances, max row/column deviation {worst:.1e}, {dt:.1f}s")


def test_criterion_02_stepwise_matches_dense_powers():
    t0 = time.perf_counter()
    rng = make_rng(202)
    worst = 0.0
    for i in range(50):
        n = int(rng.integers(3, 17))
        g = sample_instance(n, int(rng.integers(0, n // 2 + 1)), derive_seed(202, i))
        w = random_params(rng)
        prof = distance_profile(g, w, starts="all", t_max=400, record_every=1)
        ref = dense_profile(dense_operator(g, w.p, w.q, w.a), range(n), prof.t)
        worst = max(worst, float(np.abs(prof.d - ref).max()))
    dt = time.perf_counter() - t0
    record(2, worst <= 1e-10 and dt < 30, f"50 instances n<=16, max |d - dense| {worst:.1e}, {dt:.1f}s")


def test_criterion_03_decision_probabilities():
    t0 = time.perf_counter()
    pg, pj = pg_closed_form(W)
    exact = pg == 2 / 3 and pj == 1 / 3  # the correctly rounded doubles
    og, oj = absorption_oracle(W, 200, as_fraction=True)
    oracle_dev = float(max(abs(og - Fraction(2, 3)), abs(oj - Fraction(1, 3))))
    g = b1_instance(100_000, 1, 303)
    est = estimate_decisions(g, W, 0, 100_000, 303)
    z = (est.p_G - 2 / 3) / est.se_G
    dt = time.perf_counter() - t0
    ok = exact and oracle_dev < 1e-8 and abs(z) < 3 and dt < 120
    record(3, ok, f"closed form ({pg:.12f}, {pj:.12f}), oracle dev {oracle_dev:.1e}, "
                  f"p_G hat {est.p_G:.4f} ({z:+.2f} s.e.), {dt:.1f}s")


def test_criterion_04_endpoint_identity():
    n, tracks_per, checked, bad = 2000, 1000, 0, 0
    for i in range(10):
        k = 1 + i % 3
        g = b1_instance(n, k, 404 + i)
        L = int(n ** ((k + 2) / (k + 1)) / 4)
        x0 = int(make_rng(404, i).integers(0, n))
        for st in run_tracks(g, W, x0, L, tracks_per, derive_seed(404, i)):
            if st.B2_held:
                checked += 1
                bad += predicted_endpoint(g, x0, L, st.y) != st.endpoint
    record(4, bad == 0 and checked > 0, f"{10 * tracks_per} tracks, {checked} with B2 held, {bad} violations")


def test_criterion_05_gambler_tau1():
    t0 = time.perf_counter()
    t = sample_tau1(W, 100_000, 505)
    se = t.std(ddof=1) / math.sqrt(t.size)
    z = (t.mean() - 4) / se
    dt = time.perf_counter() - t0
    record(5, abs(z) < 3 and dt < 30, f"mean tau_1 {t.mean():.4f} vs 4 ({z:+.2f} s.e.), {dt:.1f}s")


def test_criterion_06_window_hits():
    t0 = time.perf_counter()
    n, k, m, alpha = 1009, 2, 5, 0.1
    expected = expected_window_hits(n, k, m, alpha)
    rng = make_rng(606)
    hits = [window_hits(rng.integers(0, n, k), n, m, alpha) for _ in range(2000)]
    rel = np.mean(hits) / expected - 1
    dt = time.perf_counter() - t0
    record(6, abs(rel) < 0.10 and dt < 60,
           f"mean hits {np.mean(hits):.4f} vs exact {expected:.4f} ({100 * rel:+.1f}%), {dt:.1f}s")


def _median_tmix(n, lengths, seed):
    recs = placement_batch(n, lengths, 20, W, 0.25, seed=seed, starts="all")
    assert not any(r.not_mixed for r in recs)
    return float(np.median([r.tmix for r in recs]))


@pytest.mark.slow
def test_criterion_07_magnitudes():
    t0 = time.perf_counter()
    m1000 = _median_tmix(1000, (227, 372, 476), 707)
    m2000 = _median_tmix(2000, (395, 995, 151), 708)
    r1, r2 = m1000 / 5623, m2000 / 13375
    ok = 1 / 3 <= r1 <= 3 and 1 / 3 <= r2 <= 3
    record(7, ok, f"median t_mix n=1000 {m1000:.0f} (x{r1:.2f} of 5623), n=2000 {m2000:.0f} "
                  f"(x{r2:.2f} of 13375), all starts, {time.perf_counter() - t0:.0f}s")


@pytest.mark.slow
def test_criterion_08_scaling_exponents():
    t0 = time.perf_counter()
    ns = [500, 1000, 2000, 4000]
    bands = {1: (1.35, 1.65), 2: (1.20, 1.47), 0: (1.85, 2.15)}
    slopes = {k: exponent_campaign(k, ns, 20, W, 0.25, seed=808).slope for k in bands}
    ok = all(lo <= slopes[k] <= hi for k, (lo, hi) in bands.items())
    detail = ", ".join(f"k={k} slope {slopes[k]:.3f} in [{lo}, {hi}]" for k, (lo, hi) in bands.items())
    record(8, ok, f"{detail}, {time.perf_counter() - t0:.0f}s")


@pytest.mark.slow
def test_criterion_09_sorted_curves():
    t0 = time.perf_counter()
    curves = sorted_scaled([200, 500], W, 0.25, k=2, placement_seed=909, reference_n=200)
    qs = curves.quantiles
    body = (qs >= 0.05 - 1e-12) & (qs <= 0.8 + 1e-12)
    top = qs >= 0.95 - 1e-12
    norm = curves.normalized[500]
    lo, hi = float(norm[body].min()), float(norm[body].max())
    top_max = float(norm[top].max())
    ok = 0.6 <= lo and hi <= 1.6 and top_max > 1.6
    record(9, ok, f"normalized n=500 curve on quantiles 0.05-0.8 in [{lo:.3f}, {hi:.3f}], "
                  f"max over top 5% {top_max:.3f}, {time.perf_counter() - t0:.0f}s")


def test_criterion_10_determinism_and_resume(tmp_path):
    a = sweep_lengths(60, W, step=3, placement_seed=10)
    b = sweep_lengths(60, W, step=3, placement_seed=10, threads=3)
    identical = "\n".join(canonical_lines(a)).encode() == "\n".join(canonical_lines(b)).encode()
    full = exponent_campaign(2, [60, 90, 120], 6, W, seed=10)
    path = tmp_path / "store.jsonl"
    try:
        exponent_campaign(2, [60, 90, 120], 6, W, seed=10, store_path=path, limit=8)
    except CampaignError:
        pass  # interrupted before the last n: no summary yet
    resumed = resume(path)
    again = resume(path)
    same = canonical_lines(resumed) == canonical_lines(full.records) == canonical_lines(again)
    record(10, identical and same, f"rerun canonical exports identical: {identical}; "
                                   f"interrupted+resumed store equals uninterrupted: {same}")


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion"):
            try:
                if "tmp_path" in fn.__code__.co_varnames[:fn.__code__.co_argcount]:
                    with tempfile.TemporaryDirectory() as d:
                        fn(Path(d))
                else:
                    fn()
            except AssertionError:
                pass
