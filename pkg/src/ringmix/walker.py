"""Trajectory simulation and the statistics of loop-erased tracks.

A track is run until its cycle displacement ``beta`` (forward steps minus
backward steps; jumps and loops count 0) first reaches ``L``.  Along the way
the move sequence is freely reduced: a move directly followed by its inverse
cancels, which is exactly loop erasure on the universal cover (a tree).  The
reduced word is then read off hub by hub:

* a jump out of hub ``j`` is a *J decision* at ``j``;
* a forward step out of hub ``j`` that is not directly preceded by a jump into
  ``j`` is a *G decision* at ``j``;
* ``u[j]`` counts forward departures from hub ``j`` (so the final, partial arc
  is included, matching the split-arc convention ``u^- = u^+ + 1`` at the
  endpoint).

With those conventions ``y_i = N_J[tail_i] - N_J[head_i]`` and the endpoint
satisfies ``X_tau = x0 + L + sum_i y_i l_i (mod n)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .errors import DomainError, InvalidInstanceError, RunawayError
from .graph import PerturbedCycle, check_B1, make_rng
from .kernel import WalkParams


def _as_rng(seed_or_rng, *extra):
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return make_rng(seed_or_rng, *extra)


def _pqa(w):
    if isinstance(w, WalkParams):
        return w.p, w.q, w.a
    p, q, a = (float(x) for x in w)
    return p, q, a


@dataclass
class TrackStats:
    """One trajectory, summarised.  Per-hub arrays follow sorted hub order."""

    x0: int
    L: int
    tau: int
    endpoint: int
    max_backtrack: int
    N_G: list
    N_J: list
    y: list
    u: list
    B2_held: bool
    monotone: bool
    initial_backtrack: bool

    def to_dict(self):
        return asdict(self)


def edge_traffic(g: PerturbedCycle, per_hub) -> np.ndarray:
    """Signed per-edge counts ``c[tail_i] - c[head_i]`` from per-hub counts."""
    per_hub = np.asarray(per_hub, dtype=np.int64)
    return np.array([per_hub[lo] - per_hub[hi] for lo, hi in g.edges], dtype=np.int64)


def predicted_endpoint(g: PerturbedCycle, x0: int, L: int, y) -> int:
    """``x0 + L + sum_i y_i l_i (mod n)``."""
    shift = sum(int(yi) * int(li) for yi, li in zip(y, g.lengths))
    return (int(x0) + int(L) + shift) % g.n


def run_track(g: PerturbedCycle, w: WalkParams, x0: int, L: int, seed, b2_threshold=None,
              budget_factor: float = 100.0) -> TrackStats:
    """Simulate from ``x0`` until the displacement first reaches ``L``.

    Args:
        seed: integer seed or a ``numpy.random.Generator``.
        b2_threshold: backtrack depth below which ``B2_held`` is set;
            defaults to ``log(n)**2``.
        budget_factor: the step budget is ``budget_factor * L / (p - q)``.

    Raises:
        RunawayError: the step budget was exhausted.
    """
    L = int(L)
    if L < 1:
        raise ValueError("L must be >= 1")
    if b2_threshold is None:
        b2_threshold = math.log(g.n) ** 2
    budget = int(math.ceil(budget_factor * L / w.drift))
    rng = _as_rng(seed)
    status, tau, end, back, word = _kernels.run_track(
        int(x0) % g.n, L, budget, g.n, g.hub_lookup, g.matching_array, g.hub_array, w.p, w.q, w.a, rng)
    if status:
        raise RunawayError(f"track did not reach L={L} within {budget} steps")
    NG, NJ, dep, monotone, init_back, word_end = _kernels.scan_word(
        word, int(x0) % g.n, g.n, g.hub_lookup, g.matching_array, g.hub_array)
    assert word_end == end
    return TrackStats(
        x0=int(x0) % g.n, L=L, tau=int(tau), endpoint=int(end), max_backtrack=int(back),
        N_G=NG.tolist(), N_J=NJ.tolist(), y=edge_traffic(g, NJ).tolist(), u=dep.tolist(),
        B2_held=bool(back < b2_threshold), monotone=bool(monotone), initial_backtrack=bool(init_back))


def run_tracks(g: PerturbedCycle, w: WalkParams, x0: int, L: int, trials: int, seed):
    """Independent tracks; trial ``i`` is seeded from ``(seed, i)``."""
    for i in range(int(trials)):
        yield run_track(g, w, x0, L, make_rng(seed, i))


def reconstruct_usage(g: PerturbedCycle, x0: int, L: int, y) -> np.ndarray:
    """Forward departures per hub implied by the traffic vector alone.

    Chains the hub-to-hub balance ``u_j = u_{j-1} -/+ y_i`` (with unit
    corrections on the arcs holding the start and the end point) and fixes
    the free constant with ``L = sum of all forward steps``.  Valid for
    monotone tracks (no backward move survives loop erasure).

    Raises:
        ValueError: the data admit no non-negative integer solution.
    """
    m = len(g.hubs)
    if m == 0:
        return np.zeros(0, dtype=np.int64)
    n, hubs, arcs = g.n, g.hubs, g.arcs
    x0 = int(x0) % n
    end = predicted_endpoint(g, x0, L, y)
    hub_at = {h: j for j, h in enumerate(hubs)}
    s = g.arc_of(x0)
    e = g.arc_of(end)
    x0_in = x0 not in hub_at
    end_in = end not in hub_at
    if x0_in and L < (hubs[(s + 1) % m] - x0) % n:
        return np.zeros(m, dtype=np.int64)
    sign = np.zeros(m, dtype=np.int64)
    edge = np.zeros(m, dtype=np.int64)
    for i, (lo, hi) in enumerate(g.edges):
        sign[lo], sign[hi] = -1, 1
        edge[lo] = edge[hi] = i

    def delta(j):
        prev = (j - 1) % m
        return (sign[j] * int(y[edge[j]])
                + (hub_at.get(x0) == j) - (hub_at.get(end) == j)
                - (end_in and e == prev) + (x0_in and s == prev))

    c = np.zeros(m, dtype=np.int64)
    for j in range(1, m):
        c[j] = c[j - 1] + delta(j)
    if c[m - 1] + delta(0) != 0:
        raise ValueError("traffic vector is not balanced around the cycle")
    ends_partial = np.array([end_in and e == j for j in range(m)], dtype=np.int64)
    init = (hubs[(s + 1) % m] - x0) % n if x0_in else 0
    fin = (end - hubs[e]) % n if end_in else 0
    rest = int(L) - init - fin - int(np.dot(arcs, c - ends_partial))
    base, rem = divmod(rest, n)
    if rem:
        raise ValueError("length constraint has no integer solution")
    u = base + c
    if (u - ends_partial).min() < 0:
        raise ValueError("negative usage implied")
    return u


@dataclass
class DecisionEstimate:
    """Empirical hub-exit frequencies starting from one hub."""

    hub: int
    trials: int
    n_G: int
    n_J: int
    n_back: int

    @property
    def p_G(self):
        return self.n_G / self.trials

    @property
    def p_J(self):
        return self.n_J / self.trials

    @property
    def p_back(self):
        return self.n_back / self.trials

    def stderr(self, frac):
        return math.sqrt(max(frac * (1 - frac), 0.0) / self.trials)

    @property
    def se_G(self):
        return self.stderr(self.p_G)

    @property
    def se_J(self):
        return self.stderr(self.p_J)


def _reach_far_end(r, start, length):
    """P(biased walk with down/up ratio r hits ``length`` before 0 from ``start``)."""
    if r == 0.0:
        return 1.0
    return (1.0 - r ** start) / (1.0 - r ** length)


def estimate_decisions(g: PerturbedCycle, w: WalkParams, hub: int, trials: int, seed,
                       method: str = "exact-exit", require_b1: bool = True,
                       max_steps: int = 10 ** 8) -> DecisionEstimate:
    """Monte Carlo frequencies of G, J and backtrack exits from hub index ``hub``.

    A trial starts at the hub and ends when a full arc is crossed: forward from
    the hub (G), forward from the matched hub after jumping (J), or backwards
    from either (backtrack).

    ``method="stepwise"`` simulates every step of the chain.  The default
    ``"exact-exit"`` only simulates the moves made at the two hubs and draws
    whether an excursion into an arc reaches its far end from the exact
    gambler's-ruin probability; it samples the same outcome distribution at a
    cost independent of the arc lengths.
    """
    if require_b1 and not check_B1(g):
        raise InvalidInstanceError("decision estimates need every arc longer than log(n)^2")
    m = len(g.hubs)
    if not 0 <= hub < m:
        raise ValueError(f"hub index {hub} outside [0, {m})")
    rng = _as_rng(seed)
    if method == "stepwise":
        out = _kernels.decision_stepwise(int(hub), int(trials), int(max_steps), g.n, g.hub_lookup,
                                         g.matching_array, g.hub_array, w.p, w.q, w.a, rng)
        if (out == 3).any():
            raise RunawayError("a decision trial exceeded its step budget")
        counts = np.bincount(out, minlength=3)
        return DecisionEstimate(hub, int(trials), int(counts[0]), int(counts[1]), int(counts[2]))
    if method != "exact-exit":
        raise ValueError(f"unknown method {method!r}")
    p, q, a = w.p, w.q, w.a
    r = q / p
    partner = g.matching[hub]
    fwd = {j: _reach_far_end(r, 1, g.arcs[j]) for j in (hub, partner)}
    # a backward excursion reaches the far end against the drift
    bwd = {}
    for j in (hub, partner):
        length = g.arcs[(j - 1) % m]
        bwd[j] = 1.0 if length == 1 else (0.0 if q == 0 else r ** (length - 1) * (1 - r) / (1 - r ** length))
    total = p + q + a
    counts = [0, 0, 0]
    for _ in range(int(trials)):
        at = hub
        while True:
            u = rng.random() * total
            if u < p:
                if rng.random() < fwd[at]:
                    counts[0 if at == hub else 1] += 1
                    break
            elif u < p + q:
                if rng.random() < bwd[at]:
                    counts[2] += 1
                    break
            else:
                at = g.matching[at]
    return DecisionEstimate(hub, int(trials), *counts)


def pg_closed_form(w) -> tuple[float, float]:
    """``p_G = (p-q+a)/(p-q+2a)`` and ``p_J = a/(p-q+2a)``."""
    p, q, a = _pqa(w)
    denom = p - q + 2 * a
    if p <= q or denom == 0:
        raise DomainError("closed form needs p > q")
    return (p - q + a) / denom, a / denom


def absorption_oracle(w, arm: int, exact: bool = True, as_fraction: bool = False) -> tuple:
    """Exit probabilities for two matched hubs on finite half-lines.

    Each hub sits at the start of a forward segment of ``arm`` edges whose far
    end absorbs; the hubs are joined by the extra edge and a backward step at
    a hub is a loop.  The absorption system is solved by elimination from the
    far ends inwards (in exact rationals by default), giving the probability
    of leaving through the hub's own segment (G) and through the partner's (J).
    With ``as_fraction=True`` the exact rationals are returned.
    """
    p, q, a = _pqa(w)
    if arm < 2:
        raise ValueError("arm must be >= 2")
    if p == 0 and q == 0 and a == 0:
        raise DomainError("degenerate absorption system")
    num = Fraction if exact else float
    p, q, a = num(p), num(q), num(a)

    def sweep(boundary):
        # h(i) = gamma_i + kappa_i h(i-1) for i = arm-1 .. 1
        gamma, kappa = num(boundary), num(0)
        for _ in range(arm - 1):
            denom = p + q - p * kappa
            gamma, kappa = p * gamma / denom, q / denom
        return gamma, kappa

    def solve(b_own, b_other):
        g1, k1 = sweep(b_own)
        g2, k2 = sweep(b_other)
        a11, a12, r1 = p + a - p * k1, -a, p * g1
        a21, a22, r2 = -a, p + a - p * k2, p * g2
        det = a11 * a22 - a12 * a21
        if det == 0:
            raise DomainError("singular absorption system")
        return (r1 * a22 - a12 * r2) / det

    pg, pj = solve(1, 0), solve(0, 1)
    if as_fraction and exact:
        return pg, pj
    return float(pg), float(pj)


@dataclass(frozen=True)
class GamblerFacts:
    """Biased-walk facts used throughout: escape probabilities and E[tau_1]."""

    p: float
    q: float

    def escape_prob(self, b: int) -> float:
        """Probability of ever reaching ``-b`` from 0, ``(q/p)**b``."""
        return (self.q / self.p) ** b

    @property
    def expected_tau1(self) -> float:
        """Mean hitting time of +1 from 0, ``1/(p-q)`` (unaffected by laziness)."""
        return 1.0 / (self.p - self.q)


def gambler_facts(w) -> GamblerFacts:
    p, q, _ = _pqa(w)
    if p <= q:
        raise DomainError("gambler facts need p > q")
    return GamblerFacts(p, q)


def sample_tau1(w, runs: int, seed, max_steps: int = 10 ** 7) -> np.ndarray:
    """Monte Carlo hitting times of +1 from 0 for the lazy biased walk."""
    p, q, _ = _pqa(w)
    out = _kernels.tau1_samples(int(runs), p, q, int(max_steps), _as_rng(seed))
    if (out < 0).any():
        raise RunawayError("a tau_1 sample exceeded its step budget")
    return out


@dataclass
class BucketStats:
    count: int
    mean: float
    std: float


def conditional_endpoint_spread(g: PerturbedCycle, w: WalkParams, T: int, trials: int, seed,
                                x0: int = 0) -> dict:
    """Position at time T relative to the centre predicted by its traffic vector.

    Each trial runs exactly ``T`` steps; its traffic ``y`` is the net signed
    number of crossings per extra edge and its predicted centre is
    ``x0 + (p-q) T + sum_i y_i l_i``.  Returns ``{y: BucketStats}`` where the
    statistics are of the signed offset of ``X_T`` from that centre.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    n = g.n
    L = w.drift * T
    shift = np.asarray(g.lengths, dtype=np.int64)
    offsets = {}
    for i in range(int(trials)):
        end, _, jumps = _kernels.run_fixed_time(int(x0) % n, int(T), n, g.hub_lookup, g.matching_array,
                                                g.hub_array, w.p, w.q, w.a, make_rng(seed, i))
        y = edge_traffic(g, jumps)
        centre = x0 + L + float(np.dot(y, shift)) if len(y) else x0 + L
        off = (end - centre + n / 2) % n - n / 2
        offsets.setdefault(tuple(int(v) for v in y), []).append(off)
    out = {}
    for y, vals in sorted(offsets.items()):
        arr = np.asarray(vals)
        out[y] = BucketStats(len(arr), float(arr.mean()), float(arr.std(ddof=1)) if len(arr) > 1 else 0.0)
    return out


def pooled_variance(buckets: dict, min_count: int = 2) -> float:
    """Within-bucket variance pooled over buckets with at least ``min_count`` trials."""
    num = den = 0.0
    for b in buckets.values():
        if b.count >= min_count:
            num += (b.count - 1) * b.std ** 2
            den += b.count - 1
    return num / den


def max_backtrack_over(g: PerturbedCycle, w: WalkParams, x0: int, horizon: int, seed) -> int:
    """Deepest drop of the displacement below its running maximum within ``horizon`` steps."""
    return int(_kernels.max_backtrack(int(x0) % g.n, int(horizon), g.n, g.hub_lookup, g.matching_array,
                                      g.hub_array, w.p, w.q, w.a, _as_rng(seed)))


def b2_failure_rate(g: PerturbedCycle, w: WalkParams, trials: int, seed, horizon=None) -> float:
    """Fraction of walks whose backtrack depth reaches ``log(n)**2`` within ``n**2`` steps."""
    horizon = g.n ** 2 if horizon is None else int(horizon)
    depth = math.log(g.n) ** 2
    fails = sum(max_backtrack_over(g, w, 0, horizon, make_rng(seed, i)) >= depth for i in range(int(trials)))
    return fails / int(trials)
