import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import mean_min_distance_all_l, window_hits_all_l
from ringmix import (ArityError, DomainError, PerturbedCycle, SizeGuardError, both_sides_check,
                     expected_window_hits, f_l, gap_stats, min_nonzero_distance, sample_instance, xi_set)
from ringmix.graph import make_rng
from ringmix.spread import (closest_pair_in_blocks, cyclic_distance, default_m, orbit, sampled_window_hits,
                            spread_report, window_hits)


def test_f_l_examples():
    assert f_l((1, 1), (3, 5), 10) == 8
    assert f_l((0, 0), (3, 5), 10) == 0
    assert f_l((2, 7), (5, 0), 10) == 0
    with pytest.raises(ArityError):
        f_l((1, 2, 3), (1, 2), 10)


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 10 ** 6), st.lists(st.integers(-50, 50), min_size=3, max_size=3),
       st.lists(st.integers(-50, 50), min_size=3, max_size=3), st.lists(st.integers(0, 10 ** 6), min_size=3, max_size=3))
def test_f_l_linear(n, y, y2, l):
    diff = [a - b for a, b in zip(y, y2)]
    assert f_l(diff, l, n) == (f_l(y, l, n) - f_l(y2, l, n)) % n


def test_distance_linearity_random_triples():
    rng = make_rng(1)
    for _ in range(10_000):
        n = int(rng.integers(2, 5000))
        k = int(rng.integers(1, 4))
        l = rng.integers(0, n, k)
        y, y2 = rng.integers(-20, 21, k), rng.integers(-20, 21, k)
        assert cyclic_distance(f_l(y, l, n) - f_l(y2, l, n), n) == cyclic_distance(f_l(y - y2, l, n), n)


def test_min_distance_examples():
    dist, wit = min_nonzero_distance([1], 100, 3)
    assert dist == 1 and abs(wit[0]) == 1
    # gcd(l, n) = 20 puts every image on a 5-point subgroup; y = 5 returns to 0
    dist, wit = min_nonzero_distance([20], 100, 5)
    assert dist == 0 and f_l(wit, [20], 100) == 0
    with pytest.raises(SizeGuardError):
        min_nonzero_distance([1] * 6, 10 ** 6, 30, guard=10 ** 6)


def test_min_distance_against_exact_expectation():
    exact = 6.7515335223818145  # enumeration of every l in Z_1009^2
    assert mean_min_distance_all_l(1009, 5) == pytest.approx(exact, rel=1e-12)
    rng = make_rng(77)
    samples = [min_nonzero_distance(rng.integers(0, 1009, 2), 1009, 5)[0] for _ in range(2000)]
    assert abs(np.mean(samples) / exact - 1) < 0.10


def test_window_expectation_examples():
    assert expected_window_hits(101, 1, 3, 0.1) == pytest.approx(6 * 7 / 101)
    assert expected_window_hits(101, 1, 3, 0.1) == pytest.approx(window_hits_all_l(101, 1, 3, 0.1), abs=1e-12)
    assert expected_window_hits(31, 2, 2, 0.5) == pytest.approx(window_hits_all_l(31, 2, 2, 0.5), abs=1e-12)
    assert expected_window_hits(101, 2, 3, 1e-6) == pytest.approx(48 / 101)
    with pytest.raises(DomainError):
        expected_window_hits(100, 1, 3, 0.1)


def test_window_expectation_doubling_m():
    a = expected_window_hits(10007, 1, 10, 0.3)
    b = expected_window_hits(10007, 1, 20, 0.3)
    assert b / a == pytest.approx(1, rel=0.05)


def test_sampled_window_hits_composite_n():
    hits = sampled_window_hits(1000, 1, 4, 0.2, 3000, 3)
    # composite n: not uniform, but the count is still even (y and -y pair up)
    assert np.all(hits % 2 == 0)
    assert hits.mean() > 0


def test_xi_set_examples():
    assert xi_set([1], 0, 4, n=50).tolist() == [0, 1, 2, 3]
    g = sample_instance(2000, 3, 4)
    pts = xi_set(g, 17, 4)
    assert len(pts) <= 4 ** 3
    assert np.all(np.diff(pts) > 0)
    both = xi_set(g, 17, 4, signs="all")
    assert set(pts) <= set(both.tolist())
    with pytest.raises(ArityError):
        xi_set(g, 0, 3, signs=(1, -1))


def test_xi_set_collisions_reduce_size():
    assert len(xi_set([5], 0, 6, n=10)) == 2


def test_max_gap_across_placements():
    n, lengths = 2000, (395, 995, 151)
    m = math.floor(n ** (1 / 8))
    rng = make_rng(3)
    gaps = []
    for _ in range(100):
        starts = rng.integers(0, n, 3)
        try:
            g = PerturbedCycle.from_pairs(n, [(s, (s + l) % n) for s, l in zip(starts, lengths)])
        except Exception:
            continue
        gs = gap_stats(xi_set(g, 0, m), n)
        assert gs.gaps.sum() == n
        gaps.append(gs.max)
    assert len(gaps) > 90 and min(gaps) >= n / m ** 3


def test_gap_stats_examples():
    gs = gap_stats([0, 50], 100)
    assert gs.gaps.tolist() == [50, 50] and gs.max == gs.min == 50
    assert gap_stats([7], 100).gaps.tolist() == [100]
    with pytest.raises(DomainError):
        gap_stats([], 10)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 5000), st.lists(st.integers(0, 10 ** 6), min_size=1, max_size=60))
def test_gaps_sum_to_n(n, pts):
    gs = gap_stats(pts, n)
    assert gs.gaps.sum() == n
    assert gs.min <= gs.mean <= gs.max


def test_pigeonhole_mean_gap_bound():
    rng = make_rng(8)
    for _ in range(50):
        n, k, m = 997, 2, 4
        l = rng.integers(0, n, k)
        gs = gap_stats(xi_set(l, 0, m, n=n), n)
        s = n / m ** k
        assert not (gs.min > s and gs.max < s)


def test_both_sides_one_dimensional():
    rep = both_sides_check([1], 6, n=1000)
    assert rep[(1,)].right == 1 and rep[(1,)].left is None and not rep[(1,)].two_sided
    assert rep[(-1,)].left == 1 and rep[(-1,)].right is None
    mirrored = both_sides_check([-1], 6, n=1000)
    assert mirrored[(1,)].left == 1 and mirrored[(1,)].right is None


def test_both_sides_success_rate_monotone_in_C():
    n, k, m = 1009, 2, 6
    rng = make_rng(21)
    Cs = [0.5, 1, 2, 4, 8]
    worst = []
    for _ in range(300):
        rep = both_sides_check(rng.integers(0, n, k), m, n=n)
        worst.append(max(r.C for r in rep.values()))
    rates = [np.mean(np.asarray(worst) < C) for C in Cs]
    assert all(b >= a for a, b in zip(rates, rates[1:]))
    assert rates[-1] > 0.5


def test_gcd_structure_of_orbits():
    rng = make_rng(2)
    for _ in range(300):
        n = int(rng.integers(2, 201))
        k = int(rng.integers(1, 4))
        y = rng.integers(-10, 11, k)
        l = rng.integers(0, n, k)
        g = math.gcd(*[int(v) for v in y], n)
        orb = orbit(y, l, n)
        assert np.all(orb % g == 0)
        # over uniform l, f_l(y) is uniform on g * Z_{n/g}
    n, y = 60, (4, 6)
    counts = np.bincount([f_l(y, (a, b), n) for a in range(n) for b in range(n)], minlength=n)
    g = math.gcd(4, 6, 60)
    assert set(np.flatnonzero(counts)) == set(range(0, n, g))
    assert len(set(counts[::g])) == 1


@pytest.mark.parametrize("alpha", [0.5, 0.25, 0.1])
def test_pigeonhole_closest_pair(alpha):
    rng = make_rng(int(alpha * 100))
    for _ in range(20):
        n, m = 1009, 4
        l = rng.integers(0, n, 2)
        dist, y1, y2, x = closest_pair_in_blocks(l, n, m, alpha)
        assert x == math.ceil(1 / alpha + 1)
        assert dist < alpha * n / m ** 2
        assert cyclic_distance(f_l(y1, l, n) - f_l(y2, l, n), n) == dist
        assert y1 != y2


def test_spread_report_row():
    rep = spread_report([101, 377], 1009, 5)
    row = rep.row()
    assert row["m"] == 5 and row["s"] == pytest.approx(1009 / 25)
    assert rep.gaps.sum() == 1009
    assert default_m(1009, 2) == math.ceil(1009 ** (1 / 6))
    assert window_hits([101, 377], 1009, 5, 0.1) == rep.window_hits
