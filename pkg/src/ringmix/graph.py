"""Perturbed-cycle instances: the cycle Z_n plus k extra edges among 2k hubs.

Hubs are kept sorted, ``hubs[0] < ... < hubs[2k-1]``, and all indices in
this module are 0-based.  Edge ``i`` joins hub indices ``edges[i] = (lo, hi)``
with ``lo < hi``; ``lo`` is the tail of the auxiliary orientation, so the
signed length of the edge is ``hubs[hi] - hubs[lo]`` folded into
``(-n/2, n/2]``.  Arc ``j`` runs from ``hubs[j]`` forward to
``hubs[j + 1]`` (cyclically) and has positive length ``arcs[j]``.

The canonical one-line text form (hub indices 1-based, as in the usual
``h_1 < ... < h_2k`` notation)::

    n=12 k=1 hubs=2,7 match=1:2

Seeded instances are written ``n=<n> k=<k> seed=<s>`` and explicit vertex
pairs ``n=<n> edges=<u:v,...>``; all three are accepted by :func:`from_spec`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import InvalidInstanceError

#: Identifier of the bit generator behind every seeded draw in the package.
PRNG_ID = "numpy.random.PCG64"


def make_rng(*seed_words) -> np.random.Generator:
    """PCG64 generator seeded from one or more non-negative integers."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(s) for s in seed_words])))


def derive_seed(*seed_words) -> int:
    """Fold a tuple of integers into a single 64-bit seed."""
    state = np.random.SeedSequence([int(s) for s in seed_words]).generate_state(1, np.uint64)
    return int(state[0])


def fold_length(delta, n):
    """Representative of ``delta mod n`` in ``(-n/2, n/2]``."""
    r = delta % n
    return r - n if 2 * r > n else r


@dataclass(frozen=True)
class PerturbedCycle:
    """Immutable perturbed-cycle instance.

    Build through :meth:`from_pairs`, :func:`sample_instance` or
    :func:`from_spec` rather than by hand; the constructor only validates.
    """

    n: int
    hubs: tuple
    matching: tuple
    edges: tuple
    lengths: tuple
    arcs: tuple

    def __post_init__(self):
        n, hubs = self.n, self.hubs
        if n < 3:
            raise InvalidInstanceError(f"cycle needs n >= 3, got {n}")
        if len(hubs) % 2:
            raise InvalidInstanceError("odd number of hubs")
        if any(not 0 <= h < n for h in hubs):
            raise InvalidInstanceError(f"hub outside [0, {n})")
        if any(b <= a for a, b in zip(hubs, hubs[1:])):
            raise InvalidInstanceError("hubs must be strictly increasing")
        m = self.matching
        if len(m) != len(hubs) or any(m[m[j]] != j or m[j] == j for j in range(len(m))):
            raise InvalidInstanceError("matching must be a fixed-point-free involution")
        if sum(self.arcs) != n and hubs:
            raise InvalidInstanceError("arc lengths must sum to n")

    @classmethod
    def from_pairs(cls, n: int, pairs: Sequence[Sequence[int]]) -> "PerturbedCycle":
        """Instance from explicit vertex pairs ``[(u1, v1), ...]``."""
        n = int(n)
        verts = [int(x) for pair in pairs for x in pair]
        if any(len(pair) != 2 for pair in pairs):
            raise InvalidInstanceError("each edge needs exactly two endpoints")
        if n < max(3, len(verts)):
            raise InvalidInstanceError(f"n={n} too small for {len(pairs)} edges")
        if any(not 0 <= v < n for v in verts):
            raise InvalidInstanceError(f"vertex outside [0, {n})")
        if len(set(verts)) != len(verts):
            raise InvalidInstanceError("hubs must be distinct (each hub carries one edge)")
        hubs = tuple(sorted(verts))
        index = {h: j for j, h in enumerate(hubs)}
        matching = [0] * len(hubs)
        for u, v in pairs:
            matching[index[int(u)]] = index[int(v)]
            matching[index[int(v)]] = index[int(u)]
        return cls._assemble(n, hubs, tuple(matching))

    @classmethod
    def _assemble(cls, n, hubs, matching):
        edges = tuple(sorted((j, matching[j]) for j in range(len(hubs)) if j < matching[j]))
        lengths = tuple(fold_length(hubs[hi] - hubs[lo], n) for lo, hi in edges)
        if hubs:
            arcs = tuple(hubs[j + 1] - hubs[j] for j in range(len(hubs) - 1)) + (hubs[0] + n - hubs[-1],)
        else:
            arcs = ()
        return cls(n, hubs, matching, edges, lengths, arcs)

    @property
    def k(self) -> int:
        return len(self.edges)

    @cached_property
    def hub_array(self) -> np.ndarray:
        return np.asarray(self.hubs, dtype=np.int64)

    @cached_property
    def partner_array(self) -> np.ndarray:
        """Vertex reached by the extra edge from each hub (aligned with ``hubs``)."""
        return np.asarray([self.hubs[m] for m in self.matching], dtype=np.int64)

    @cached_property
    def matching_array(self) -> np.ndarray:
        return np.asarray(self.matching, dtype=np.int64)

    @cached_property
    def hub_lookup(self) -> np.ndarray:
        """Length-n array: hub index at each vertex, -1 elsewhere."""
        out = np.full(self.n, -1, dtype=np.int64)
        out[self.hub_array] = np.arange(len(self.hubs))
        return out

    @cached_property
    def edge_of_hub(self) -> np.ndarray:
        """Signed edge label per hub: ``+(i+1)`` at the tail of edge i, ``-(i+1)`` at its head."""
        out = np.zeros(len(self.hubs), dtype=np.int64)
        for i, (lo, hi) in enumerate(self.edges):
            out[lo] = i + 1
            out[hi] = -(i + 1)
        return out

    def arc_of(self, x: int) -> int:
        """Index j of the arc with ``hubs[j] <= x < hubs[j+1]`` (cyclically)."""
        j = int(np.searchsorted(self.hub_array, x, side="right")) - 1
        return j % len(self.hubs)

    def to_text(self) -> str:
        return serialize(self)

    def __str__(self):
        return serialize(self)


@dataclass(frozen=True)
class InstanceSpec:
    """Text-serializable instance recipe: seeded (``seed``, ``k``) or explicit ``pairs``."""

    n: int
    k: int | None = None
    seed: int | None = None
    pairs: tuple | None = field(default=None)

    def __post_init__(self):
        if self.pairs is None and (self.seed is None or self.k is None):
            raise InvalidInstanceError("spec needs either (seed, k) or explicit pairs")
        if self.pairs is not None:
            verts = [v for pr in self.pairs for v in pr]
            if len(set(verts)) != len(verts):
                raise InvalidInstanceError("explicit hub pairs must use 2k distinct vertices")

    @classmethod
    def parse(cls, text: str) -> "InstanceSpec":
        fields = {}
        for token in text.split():
            if "=" not in token:
                raise InvalidInstanceError(f"malformed token {token!r}")
            key, _, value = token.partition("=")
            fields[key] = value
        try:
            n = int(fields["n"])
            if "seed" in fields:
                return cls(n=n, k=int(fields["k"]), seed=int(fields["seed"]))
            if "edges" in fields:
                pairs = _parse_pairs(fields["edges"])
                return cls(n=n, k=len(pairs), pairs=pairs)
            hubs = [int(h) for h in fields.get("hubs", "").split(",") if h]
            match = _parse_pairs(fields.get("match", ""))
        except (KeyError, ValueError) as exc:
            raise InvalidInstanceError(f"cannot parse instance {text!r}: {exc}") from None
        k = int(fields.get("k", len(match)))
        if len(hubs) != 2 * k or len(match) != k:
            raise InvalidInstanceError(f"instance {text!r}: expected {2 * k} hubs and {k} matched pairs")
        used = sorted(j for pr in match for j in pr)
        if used != list(range(1, 2 * k + 1)):
            raise InvalidInstanceError(f"instance {text!r}: match must pair hub indices 1..{2 * k}")
        pairs = tuple((hubs[a - 1], hubs[b - 1]) for a, b in match)
        return cls(n=n, k=k, pairs=pairs)

    def to_text(self) -> str:
        if self.pairs is None:
            return f"n={self.n} k={self.k} seed={self.seed}"
        return serialize(PerturbedCycle.from_pairs(self.n, self.pairs))


def _parse_pairs(text):
    pairs = []
    for item in text.split(","):
        if not item:
            continue
        a, b = item.split(":")
        pairs.append((int(a), int(b)))
    return tuple(pairs)


def serialize(g: PerturbedCycle) -> str:
    """Canonical one-line text form of an instance."""
    hubs = ",".join(str(h) for h in g.hubs)
    match = ",".join(f"{lo + 1}:{hi + 1}" for lo, hi in g.edges)
    return f"n={g.n} k={g.k} hubs={hubs} match={match}"


def sample_instance(n: int, k: int, seed: int) -> PerturbedCycle:
    """Uniformly random instance: 2k distinct hubs and a uniform perfect matching.

    The hub set is a uniform 2k-subset of Z_n and the matching is uniform over
    the perfect matchings of those hubs.  The draw is a pure function of
    ``(n, k, seed)`` through :data:`PRNG_ID`.
    """
    n, k = int(n), int(k)
    if k < 0:
        raise InvalidInstanceError("k must be non-negative")
    if n < max(3, 2 * k):
        raise InvalidInstanceError(f"need n >= max(3, 2k), got n={n}, k={k}")
    rng = make_rng(seed)
    hubs = np.sort(rng.choice(n, size=2 * k, replace=False))
    perm = rng.permutation(2 * k)
    pairs = [(int(hubs[perm[2 * i]]), int(hubs[perm[2 * i + 1]])) for i in range(k)]
    return PerturbedCycle.from_pairs(n, pairs)


def from_spec(spec) -> PerturbedCycle:
    """Instance from an :class:`InstanceSpec` or any accepted text form."""
    if isinstance(spec, str):
        spec = InstanceSpec.parse(spec)
    if spec.pairs is None:
        return sample_instance(spec.n, spec.k, spec.seed)
    return PerturbedCycle.from_pairs(spec.n, spec.pairs)


def check_B1(g: PerturbedCycle, threshold: float | None = None) -> bool:
    """True iff every arc is longer than ``threshold`` (default ``log(n)**2``)."""
    if threshold is None:
        threshold = math.log(g.n) ** 2
    return all(a > threshold for a in g.arcs)
