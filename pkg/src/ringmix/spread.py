"""Spread of the linear form ``f_l(y) = sum_i y_i l_i (mod n)`` over integer boxes.

Endpoints reachable with traffic ``y`` sit at ``L + f_l(y)``, so how evenly a
box of ``y`` vectors is spread by ``f_l`` decides how evenly the walk covers
the cycle.  The natural gap scale for ``m**k`` points is the standard
distance ``s = n / m**k``.

Boxes:

* ``Y'_m = [-m, m]^k`` (symmetric, used for distances to 0);
* ``Y_m^b = {y : 0 <= b_i y_i < m}`` for a sign pattern ``b in {+1,-1}^k``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import ArityError, DomainError, SizeGuardError
from .graph import PerturbedCycle, make_rng

logger = logging.getLogger(__name__)

#: Largest number of lattice points any enumeration may touch.
ENUMERATION_GUARD = 10 ** 8


def _lengths(g_or_l):
    if isinstance(g_or_l, PerturbedCycle):
        return np.asarray(g_or_l.lengths, dtype=np.int64)
    return np.atleast_1d(np.asarray(g_or_l, dtype=np.int64))


def _guard(count, guard):
    if count > guard:
        raise SizeGuardError(f"enumeration of {count} points exceeds guard {guard}")


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    return all(n % d for d in range(3, math.isqrt(n) + 1, 2))


def cyclic_distance(x, n):
    """``d(x, 0)`` on Z_n; works elementwise on arrays."""
    r = np.mod(x, n)
    return np.minimum(r, n - r)


def standard_distance(n: int, m: int, k: int) -> float:
    return n / m ** k


def default_m(n: int, k: int, rho: float = 1.0) -> int:
    """``ceil(sqrt(rho) * n**(1/(2k+2)))``."""
    return max(1, math.ceil(math.sqrt(rho) * n ** (1.0 / (2 * k + 2))))


def f_l(y, l, n: int) -> int:
    """``sum_i y_i l_i mod n`` in exact integer arithmetic."""
    y, l = list(y), list(l)
    if len(y) != len(l):
        raise ArityError(f"y has {len(y)} entries but l has {len(l)}")
    return sum(int(a) * int(b) for a, b in zip(y, l)) % n


def symmetric_box(k: int, m: int, guard: int = ENUMERATION_GUARD) -> np.ndarray:
    """All of ``[-m, m]^k`` as rows, zero vector included."""
    _guard((2 * m + 1) ** k, guard)
    axes = [np.arange(-m, m + 1)] * k
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)


def sign_patterns(k: int):
    return [tuple(b) for b in itertools.product((1, -1), repeat=k)]


def sign_box(signs, m: int, lo: int = 0, guard: int = ENUMERATION_GUARD) -> np.ndarray:
    """``{y : lo <= b_i y_i < m}`` as rows."""
    signs = np.asarray(signs, dtype=np.int64)
    k = len(signs)
    _guard((m - lo) ** k, guard)
    axes = [np.arange(lo, m)] * k
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
    return grid * signs


def images(Y, l, n):
    return np.mod(Y @ np.asarray(l, dtype=np.int64), n)


def min_nonzero_distance(l, n: int, m: int, guard: int = ENUMERATION_GUARD):
    """Closest approach of ``f_l`` to 0 over ``[-m, m]^k`` minus the origin.

    Returns:
        (distance, witness y as a tuple).
    """
    l = _lengths(l)
    if m < 1:
        raise ValueError("m must be >= 1")
    Y = symmetric_box(len(l), m, guard)
    Y = Y[np.any(Y != 0, axis=1)]
    dist = cyclic_distance(images(Y, l, n), n)
    i = int(np.argmin(dist))
    return int(dist[i]), tuple(int(v) for v in Y[i])


def window_hits(l, n: int, m: int, alpha: float, guard: int = ENUMERATION_GUARD) -> int:
    """Number of nonzero ``y in [-m, m]^k`` with ``d(f_l(y), 0) <= floor(alpha * s)``."""
    l = _lengths(l)
    k = len(l)
    radius = math.floor(alpha * standard_distance(n, m, k))
    Y = symmetric_box(k, m, guard)
    Y = Y[np.any(Y != 0, axis=1)]
    return int(np.count_nonzero(cyclic_distance(images(Y, l, n), n) <= radius))


def expected_window_hits(n: int, k: int, m: int, alpha: float) -> float:
    """Exact mean of :func:`window_hits` over uniform ``l in Z_n^k``, n prime.

    Each nonzero ``y`` has a uniformly distributed image when n is prime, so
    the mean is ``((2m+1)^k - 1) * (2 * floor(alpha * s) + 1) / n``.
    """
    if not is_prime(n):
        raise DomainError(f"n={n} is not prime; use sampled_window_hits")
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    radius = math.floor(alpha * standard_distance(n, m, k))
    if 2 * radius + 1 > n:
        raise DomainError("window wraps the whole cycle")
    return ((2 * m + 1) ** k - 1) * (2 * radius + 1) / n


def sampled_window_hits(n: int, k: int, m: int, alpha: float, samples: int, seed) -> np.ndarray:
    """Window hit counts for ``samples`` uniform draws of ``l``; any n."""
    rng = make_rng(seed)
    ls = rng.integers(0, n, size=(int(samples), k))
    return np.array([window_hits(l, n, m, alpha) for l in ls])


def xi_set(g_or_l, L: int, m: int, signs="+", n: int | None = None,
           guard: int = ENUMERATION_GUARD) -> np.ndarray:
    """Sorted distinct points ``f_l(y) + L mod n`` over a sign box.

    Args:
        g_or_l: an instance (lengths and n taken from it) or a length vector,
            in which case ``n`` is required.
        signs: ``"+"`` for the all-positive pattern, a tuple of +-1, or
            ``"all"`` for the union over every pattern.
    """
    if isinstance(g_or_l, PerturbedCycle):
        n = g_or_l.n
    elif n is None:
        raise ValueError("n is required when lengths are given directly")
    l = _lengths(g_or_l)
    k = len(l)
    if signs == "all":
        patterns = sign_patterns(k)
    elif signs == "+":
        patterns = [(1,) * k]
    else:
        if len(signs) != k:
            raise ArityError("sign pattern length must equal k")
        patterns = [tuple(signs)]
    _guard(len(patterns) * m ** k, guard)
    pts = [images(sign_box(b, m, guard=guard), l, n) for b in patterns]
    return np.unique(np.mod(np.concatenate(pts) + int(L), n))


@dataclass
class GapStats:
    min: int
    max: int
    mean: float
    histogram: np.ndarray
    bin_edges: np.ndarray
    gaps: np.ndarray


def gap_stats(points, n: int, bins: int = 10) -> GapStats:
    """Cyclic gaps between consecutive distinct points; the gaps sum to n."""
    pts = np.unique(np.mod(np.asarray(points, dtype=np.int64), n))
    if pts.size == 0:
        raise DomainError("gap statistics need at least one point")
    gaps = np.diff(np.append(pts, pts[0] + n))
    hist, edges = np.histogram(gaps, bins=bins)
    return GapStats(int(gaps.min()), int(gaps.max()), float(gaps.mean()), hist, edges, gaps)


@dataclass
class SideReport:
    """Closest images to ``target`` on each side, for one sign pattern."""

    right: int | None
    left: int | None
    C: float

    @property
    def two_sided(self) -> bool:
        return self.right is not None and self.left is not None


def both_sides_check(g_or_l, m: int, n: int | None = None, target: int = 0,
                     guard: int = ENUMERATION_GUARD) -> dict:
    """Per sign pattern, nearest images strictly right and strictly left of ``target``.

    ``C`` is the smallest constant with both sides present inside
    ``(target - C s, target + C s)`` in the limiting sense, i.e. the larger
    of the two one-sided distances divided by ``s``; ``inf`` when one side
    is empty.
    """
    if isinstance(g_or_l, PerturbedCycle):
        n = g_or_l.n
    l = _lengths(g_or_l)
    k = len(l)
    s = standard_distance(n, m, k)
    out = {}
    for b in sign_patterns(k):
        rel = np.mod(images(sign_box(b, m, guard=guard), l, n) - target, n)
        signed = np.where(2 * rel > n, rel - n, rel)
        pos = signed[signed > 0]
        neg = -signed[signed < 0]
        right = int(pos.min()) if pos.size else None
        left = int(neg.min()) if neg.size else None
        C = max(right, left) / s if right is not None and left is not None else math.inf
        out[b] = SideReport(right, left, C)
    return out


def closest_pair_in_blocks(l, n: int, m: int, alpha: float, signs=None):
    """Closest pair of images over the first ``x = ceil(1/alpha + 1)`` diagonal blocks.

    Block ``j`` is ``{y : (j-1) m <= b_i y_i < j m}`` and every block has
    ``m**k`` points, so ``x`` blocks hold more than ``n / (alpha s)`` points
    and two of them must land closer than ``alpha * s``.

    Returns:
        (distance, y1, y2, x).
    """
    l = _lengths(l)
    k = len(l)
    signs = (1,) * k if signs is None else tuple(signs)
    x = math.ceil(1 / alpha + 1)
    Y = np.concatenate([_block(signs, m, j) for j in range(1, x + 1)])
    img = images(Y, l, n)
    order = np.argsort(img, kind="stable")
    srt = img[order]
    gaps = np.diff(np.append(srt, srt[0] + n))
    i = int(np.argmin(gaps))
    a, b = order[i], order[(i + 1) % len(order)]
    return int(gaps[i]), tuple(int(v) for v in Y[a]), tuple(int(v) for v in Y[b]), x


def _block(signs, m, j):
    return sign_box(signs, j * m, lo=(j - 1) * m)


def orbit(y, l, n: int) -> np.ndarray:
    """Sorted distinct values of ``f_l(t * y)`` over all t."""
    base = f_l(y, l, n)
    return np.unique((base * np.arange(n, dtype=np.int64)) % n)


@dataclass
class SpreadReport:
    n: int
    m: int
    k: int
    lengths: tuple
    s: float
    min_distance: int
    witness: tuple
    gaps: np.ndarray
    max_gap: int
    window_hits: int
    alpha: float

    def row(self) -> dict:
        return {
            "n": self.n, "k": self.k, "m": self.m,
            "lengths": " ".join(map(str, self.lengths)),
            "s": self.s, "min_distance": self.min_distance,
            "min_distance_over_s": self.min_distance / self.s,
            "max_gap": self.max_gap, "max_gap_over_s": self.max_gap / self.s,
            "window_hits": self.window_hits,
        }


def spread_report(l, n: int, m: int | None = None, L: int = 0, alpha: float = 0.1) -> SpreadReport:
    """Distance, gap and window statistics for one length vector."""
    l = _lengths(l)
    k = len(l)
    m = default_m(n, k) if m is None else m
    dist, witness = min_nonzero_distance(l, n, m)
    gs = gap_stats(xi_set(l, L, m, n=n), n)
    return SpreadReport(n, m, k, tuple(int(v) for v in l), standard_distance(n, m, k), dist, witness,
                        gs.gaps, gs.max, window_hits(l, n, m, alpha), alpha)
