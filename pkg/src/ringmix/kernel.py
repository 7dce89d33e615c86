"""The non-reversible transition operator on a perturbed cycle.

From vertex v the walk moves forward to v+1 with probability p, backward to
v-1 with probability q and, if v is a hub, across its extra edge with
probability a; the remaining mass is a loop at v.  Masses landing on the same
target (a hub matched to its cycle neighbour) are added, which keeps every
column sum equal to 1, so the uniform distribution is stationary.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .errors import ParameterError
from .graph import PerturbedCycle

#: Default parameters.  These are a package choice; nothing upstream fixes them.
DEFAULT_P, DEFAULT_Q, DEFAULT_A = 0.5, 0.25, 0.25


@dataclass(frozen=True)
class WalkParams:
    """Forward, backward and across probabilities.

    ``a = 0`` is allowed (the extra edges are then never used); ergodicity on
    a given instance is the caller's concern.
    """

    p: float = DEFAULT_P
    q: float = DEFAULT_Q
    a: float = DEFAULT_A

    def __post_init__(self):
        p, q, a = self.p, self.q, self.a
        if not (q >= 0 and p > q):
            raise ParameterError(f"need p > q >= 0, got p={p}, q={q}")
        if a < 0:
            raise ParameterError(f"need a >= 0, got a={a}")
        if p + q + a > 1 + 1e-12:
            raise ParameterError(f"need p + q + a <= 1, got {p + q + a}")

    @property
    def loop(self) -> float:
        """Loop mass at a non-hub vertex."""
        return 1.0 - self.p - self.q

    @property
    def hub_loop(self) -> float:
        """Loop mass at a hub."""
        return max(0.0, 1.0 - self.p - self.q - self.a)

    @property
    def drift(self) -> float:
        return self.p - self.q

    def as_dict(self):
        return {"p": self.p, "q": self.q, "a": self.a}


def loop_vector(g: PerturbedCycle, w: WalkParams) -> np.ndarray:
    loop = np.full(g.n, w.loop)
    loop[g.hub_array] = w.hub_loop
    return loop


def transition_row(g: PerturbedCycle, w: WalkParams, v: int) -> dict:
    """Sparse row ``P(v, .)`` as ``{target: probability}``; zero masses are dropped."""
    n = g.n
    if not 0 <= v < n:
        raise ValueError(f"vertex {v} outside [0, {n})")
    row = {}

    def put(target, mass):
        if mass > 0:
            row[target] = row.get(target, 0.0) + mass

    put((v + 1) % n, w.p)
    put((v - 1) % n, w.q)
    j = g.hub_lookup[v]
    if j >= 0:
        put(int(g.partner_array[j]), w.a)
        put(v, w.hub_loop)
    else:
        put(v, w.loop)
    return row


def step_distribution(g: PerturbedCycle, w: WalkParams, d) -> np.ndarray:
    """One step of distribution evolution, ``d -> d P``.

    ``d`` may also be a 2-D array whose rows are distributions.
    """
    d = np.asarray(d, dtype=np.float64)
    rows = np.atleast_2d(d)
    if rows.shape[1] != g.n:
        raise ValueError(f"distribution length {rows.shape[1]} != n={g.n}")
    out = _kernels.step_rows(np.ascontiguousarray(rows), g.hub_array, g.partner_array,
                             w.p, w.q, w.a, loop_vector(g, w))
    return out[0] if d.ndim == 1 else out


def transition_matrix(g: PerturbedCycle, w: WalkParams, kind: str = "sparse"):
    """The full operator.

    Args:
        kind: ``"sparse"`` (CSR), ``"dense"`` (ndarray) or ``"exact"``
            (list of lists of :class:`fractions.Fraction`, n <= 64 only; the
            float parameters are taken at their exact binary values).
    """
    n = g.n
    if kind == "exact":
        if n > 64:
            raise ValueError("exact arithmetic is limited to n <= 64")
        p, q, a = Fraction(w.p), Fraction(w.q), Fraction(w.a)
        P = [[Fraction(0)] * n for _ in range(n)]
        for v in range(n):
            P[v][(v + 1) % n] += p
            P[v][(v - 1) % n] += q
            j = g.hub_lookup[v]
            if j >= 0:
                P[v][int(g.partner_array[j])] += a
                P[v][v] += 1 - p - q - a
            else:
                P[v][v] += 1 - p - q
        return P
    rows, cols, vals = [], [], []
    for v in range(n):
        for target, mass in transition_row(g, w, v).items():
            rows.append(v)
            cols.append(target)
            vals.append(mass)
    P = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    if kind == "sparse":
        return P
    if kind == "dense":
        return P.toarray()
    raise ValueError(f"unknown kind {kind!r}")


def sample_step(g: PerturbedCycle, w: WalkParams, v: int, rng: np.random.Generator) -> int:
    """Next state from v, consuming exactly one ``rng.random()`` draw.

    The uniform is compared against the cumulative masses in the order
    forward, backward, across, loop.
    """
    u = rng.random()
    if u < w.p:
        return (v + 1) % g.n
    if u < w.p + w.q:
        return (v - 1) % g.n
    j = g.hub_lookup[v]
    if j >= 0 and u < w.p + w.q + w.a:
        return int(g.partner_array[j])
    return v


def walk(g: PerturbedCycle, w: WalkParams, x0: int, steps: int, rng: np.random.Generator) -> np.ndarray:
    """Compiled equivalent of ``steps`` calls to :func:`sample_step`; returns the path."""
    return _kernels.walk_path(int(x0), int(steps), g.n, g.hub_lookup, g.matching_array,
                              g.hub_array, w.p, w.q, w.a, rng)
