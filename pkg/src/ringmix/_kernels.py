"""Compiled inner loops.

Every walk simulator draws exactly one uniform per step and resolves it in
the fixed order forward / backward / across / loop, the same rule as
:func:`ringmix.kernel.sample_step`.  Moves in a track are encoded as ``+1``
(forward), ``-1`` (backward) and ``2 + j`` (jump out of hub index ``j``).
"""

import numpy as np
from numba import njit


@njit(nogil=True, cache=True)
def _step_into(d, nd, hubs, partner, p, q, a, loop):
    n = d.shape[0]
    nd[0] = p * d[n - 1] + q * d[1] + loop[0] * d[0]
    for v in range(1, n - 1):
        nd[v] = p * d[v - 1] + q * d[v + 1] + loop[v] * d[v]
    nd[n - 1] = p * d[n - 2] + q * d[0] + loop[n - 1] * d[n - 1]
    for i in range(hubs.shape[0]):
        nd[partner[i]] += a * d[hubs[i]]


@njit(nogil=True, cache=True)
def step_rows(D, hubs, partner, p, q, a, loop):
    out = np.empty_like(D)
    for s in range(D.shape[0]):
        _step_into(D[s], out[s], hubs, partner, p, q, a, loop)
    return out


@njit(nogil=True, cache=True)
def _worst_tv(D, target):
    worst = 0.0
    for s in range(D.shape[0]):
        acc = 0.0
        for v in range(D.shape[1]):
            acc += abs(D[s, v] - target)
        if acc > worst:
            worst = acc
    return 0.5 * worst


@njit(nogil=True, cache=True)
def evolve_profile(D, hubs, partner, p, q, a, loop, t_max, record_every, eps_desc):
    """Evolve every row of D, tracking d(t) = max_rows TV(row, uniform).

    Returns (rec_t, rec_d, cross, t_end, d_end, D_end).  ``cross[i]`` is the
    first t with d(t) <= eps_desc[i] (or -1); evolution stops early once the
    smallest epsilon is reached.
    """
    n = D.shape[1]
    target = 1.0 / n
    cap = t_max // record_every + 2
    rec_t = np.empty(cap, np.int64)
    rec_d = np.empty(cap, np.float64)
    cross = np.full(eps_desc.shape[0], -1, np.int64)
    cur = D.copy()
    nxt = np.empty_like(cur)
    d = _worst_tv(cur, target)
    rec_t[0] = 0
    rec_d[0] = d
    nrec = 1
    ne = eps_desc.shape[0]
    nxt_eps = 0
    while nxt_eps < ne and d <= eps_desc[nxt_eps]:
        cross[nxt_eps] = 0
        nxt_eps += 1
    t = 0
    if ne > 0 and nxt_eps == ne:
        return rec_t[:nrec], rec_d[:nrec], cross, t, d, cur
    while t < t_max:
        t += 1
        for s in range(cur.shape[0]):
            _step_into(cur[s], nxt[s], hubs, partner, p, q, a, loop)
        cur, nxt = nxt, cur
        d = _worst_tv(cur, target)
        while nxt_eps < ne and d <= eps_desc[nxt_eps]:
            cross[nxt_eps] = t
            nxt_eps += 1
        done = ne > 0 and nxt_eps == ne
        if t % record_every == 0 or done or t == t_max:
            rec_t[nrec] = t
            rec_d[nrec] = d
            nrec += 1
        if done:
            break
    return rec_t[:nrec], rec_d[:nrec], cross, t, d, cur


@njit(nogil=True, cache=True)
def _draw(u, x, n, hub_lookup, partner_idx, hubs, p, q, a):
    """Resolve one uniform at vertex x: returns (next vertex, move code or 0 for a loop)."""
    if u < p:
        return (x + 1) % n, 1
    if u < p + q:
        return (x - 1) % n, -1
    j = hub_lookup[x]
    if j >= 0 and u < p + q + a:
        return hubs[partner_idx[j]], 2 + j
    return x, 0


@njit(nogil=True, cache=True)
def walk_path(x0, steps, n, hub_lookup, partner_idx, hubs, p, q, a, rng):
    out = np.empty(steps + 1, np.int64)
    out[0] = x0
    x = x0
    for t in range(steps):
        x, _ = _draw(rng.random(), x, n, hub_lookup, partner_idx, hubs, p, q, a)
        out[t + 1] = x
    return out


@njit(nogil=True, cache=True)
def run_track(x0, L, max_steps, n, hub_lookup, partner_idx, hubs, p, q, a, rng):
    """Walk until the cycle displacement first reaches L.

    Returns (status, tau, endpoint, max_backtrack, word) where ``word`` is the
    freely reduced move sequence (the loop-erased track on the universal
    cover) and status is 0 on success, 1 on budget overflow.
    """
    cap = L + 64
    word = np.empty(cap, np.int64)
    top = 0
    x = x0
    beta = 0
    best = 0
    max_back = 0
    t = 0
    while beta < L:
        if t >= max_steps:
            return 1, t, x, max_back, word[:top]
        t += 1
        x, mv = _draw(rng.random(), x, n, hub_lookup, partner_idx, hubs, p, q, a)
        if mv == 0:
            continue
        if mv == 1 or mv == -1:
            beta += mv
            if beta > best:
                best = beta
            elif best - beta > max_back:
                max_back = best - beta
            inv = -mv
        else:
            # arrived at hubs[partner_idx[j]]; reversing jumps out of that hub
            inv = 2 + partner_idx[mv - 2]
        if top > 0 and word[top - 1] == inv:
            top -= 1
        else:
            if top == cap:
                bigger = np.empty(2 * cap, np.int64)
                bigger[:cap] = word
                word = bigger
                cap *= 2
            word[top] = mv
            top += 1
    return 0, t, x, max_back, word[:top]


@njit(nogil=True, cache=True)
def scan_word(word, x0, n, hub_lookup, partner_idx, hubs):
    """Decision counts along a reduced move word.

    Returns (N_G, N_J, departures, monotone, initial_backtrack, end) with
    per-hub arrays.  A jump out of hub j is a J decision at j; a forward step
    out of hub j not directly preceded by a jump into j is a G decision at j;
    ``departures[j]`` counts all forward steps out of hub j.
    """
    m = hubs.shape[0]
    NG = np.zeros(m, np.int64)
    NJ = np.zeros(m, np.int64)
    dep = np.zeros(m, np.int64)
    monotone = True
    initial_back = word.shape[0] > 0 and word[0] == -1
    x = x0
    prev = 0
    for i in range(word.shape[0]):
        mv = word[i]
        if mv == 1:
            j = hub_lookup[x]
            if j >= 0:
                dep[j] += 1
                if prev < 2:
                    NG[j] += 1
            x = (x + 1) % n
        elif mv == -1:
            monotone = False
            x = (x - 1) % n
        else:
            j = mv - 2
            NJ[j] += 1
            x = hubs[partner_idx[j]]
        prev = mv
    return NG, NJ, dep, monotone, initial_back, x


@njit(nogil=True, cache=True)
def run_fixed_time(x0, T, n, hub_lookup, partner_idx, hubs, p, q, a, rng):
    """Walk T steps; return (endpoint, cycle displacement, net jumps per hub)."""
    jumps = np.zeros(hubs.shape[0], np.int64)
    x = x0
    beta = 0
    for _ in range(T):
        x, mv = _draw(rng.random(), x, n, hub_lookup, partner_idx, hubs, p, q, a)
        if mv == 1 or mv == -1:
            beta += mv
        elif mv >= 2:
            jumps[mv - 2] += 1
    return x, beta, jumps


@njit(nogil=True, cache=True)
def max_backtrack(x0, horizon, n, hub_lookup, partner_idx, hubs, p, q, a, rng):
    x = x0
    beta = 0
    best = 0
    worst = 0
    for _ in range(horizon):
        x, mv = _draw(rng.random(), x, n, hub_lookup, partner_idx, hubs, p, q, a)
        if mv == 1 or mv == -1:
            beta += mv
            if beta > best:
                best = beta
            elif best - beta > worst:
                worst = best - beta
    return worst


@njit(nogil=True, cache=True)
def tau1_samples(runs, p, q, max_steps, rng):
    """Hitting times of +1 from 0 for the lazy biased walk on Z (-1 on overflow)."""
    out = np.empty(runs, np.int64)
    for r in range(runs):
        pos = 0
        t = 0
        while pos < 1 and t < max_steps:
            u = rng.random()
            t += 1
            if u < p:
                pos += 1
            elif u < p + q:
                pos -= 1
        out[r] = t if pos == 1 else -1
    return out


@njit(nogil=True, cache=True)
def decision_stepwise(j0, trials, max_steps, n, hub_lookup, partner_idx, hubs, p, q, a, rng):
    """Full-chain simulation of the next hub-to-hub exit from hub index j0.

    Outcomes: 0 = G (forward across arc j0), 1 = J (forward across the arc
    after the matched hub), 2 = backtrack (a full arc crossed backwards),
    3 = budget overflow.
    """
    m = hubs.shape[0]
    jm = partner_idx[j0]
    g_end = hubs[(j0 + 1) % m]
    j_end = hubs[(jm + 1) % m]
    b_end0 = hubs[(j0 - 1) % m]
    b_end1 = hubs[(jm - 1) % m]
    out = np.empty(trials, np.int64)
    for r in range(trials):
        x = hubs[j0]
        res = 3
        # track which arc-direction we are on: the exit vertex alone is ambiguous
        last_hub = j0
        for _ in range(max_steps):
            y, mv = _draw(rng.random(), x, n, hub_lookup, partner_idx, hubs, p, q, a)
            if mv >= 2:
                last_hub = partner_idx[mv - 2]
                x = y
                continue
            if mv == 0:
                continue
            if hub_lookup[x] >= 0:
                last_hub = hub_lookup[x]
            x = y
            if hub_lookup[x] < 0 or hub_lookup[x] == last_hub:
                continue
            # reached a different hub through an arc that left `last_hub`
            if mv == 1 and last_hub == j0 and x == g_end:
                res = 0
            elif mv == 1 and last_hub == jm and x == j_end:
                res = 1
            elif mv == -1 and ((last_hub == j0 and x == b_end0) or (last_hub == jm and x == b_end1)):
                res = 2
            break
        out[r] = res
    return out
