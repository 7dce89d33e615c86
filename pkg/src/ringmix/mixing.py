"""Total-variation distance profiles, mixing times and scaling-exponent fits.

``d(t)`` is the largest total-variation distance to the uniform distribution
over a chosen set of starting distributions; the mixing time ``t_mix(eps)``
is the first ``t`` with ``d(t) <= eps``.  Distributions are evolved step by
step, so the reported mixing time is exact for the start set used.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ArityError, DimensionError, NotMixedError, NumericalDriftError
from .graph import PerturbedCycle, serialize
from .kernel import WalkParams, loop_vector, transition_matrix

logger = logging.getLogger(__name__)

#: Instances up to this size default to the full (all-starts) definition.
ALL_STARTS_MAX_N = 512


def tv_distance(d1, d2) -> float:
    """Half the L1 distance between two probability vectors."""
    d1 = np.asarray(d1, dtype=np.float64)
    d2 = np.asarray(d2, dtype=np.float64)
    if d1.shape != d2.shape:
        raise DimensionError(f"shape mismatch {d1.shape} vs {d2.shape}")
    return 0.5 * float(np.abs(d1 - d2).sum())


def default_starts(g: PerturbedCycle) -> str:
    return "all" if g.n <= ALL_STARTS_MAX_N else "single:0"


def start_matrix(g: PerturbedCycle, starts) -> tuple[np.ndarray, str]:
    """Initial distributions (one per row) and a text label for them.

    ``starts`` may be ``"all"``, ``"hubs"`` (hubs and their cycle neighbours),
    ``"single:<v>"``, an iterable of vertices, or an array of distributions.
    """
    n = g.n
    if isinstance(starts, str):
        if starts == "all":
            return np.eye(n), "all"
        if starts == "hubs":
            verts = sorted({(h + s) % n for h in g.hubs for s in (-1, 0, 1)}) or [0]
            label = "hubs"
        elif starts.startswith("single:"):
            verts = [int(starts.split(":", 1)[1]) % n]
            label = f"single:{verts[0]}"
        else:
            raise ValueError(f"unknown start mode {starts!r}")
    else:
        arr = np.asarray(starts)
        if arr.dtype.kind == "f":
            rows = np.atleast_2d(arr).astype(np.float64)
            if rows.shape[1] != n:
                raise DimensionError(f"start distribution length {rows.shape[1]} != n={n}")
            return np.ascontiguousarray(rows), f"dist:{rows.shape[0]}"
        verts = [int(v) % n for v in np.atleast_1d(arr)]
        label = "set:" + ",".join(map(str, verts))
    D = np.zeros((len(verts), n))
    D[np.arange(len(verts)), verts] = 1.0
    return D, label


@dataclass
class MixingProfile:
    """Recorded ``(t, d(t))`` pairs plus exact first-passage times per epsilon."""

    instance: str
    starts: str
    t: np.ndarray
    d: np.ndarray
    tmix: dict = field(default_factory=dict)

    @property
    def last_d(self) -> float:
        return float(self.d[-1])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "d"])
            for t, d in zip(self.t, self.d):
                writer.writerow([int(t), repr(float(d))])


def distance_profile(g: PerturbedCycle, w: WalkParams, starts="auto", t_max=None,
                     record_every=None, eps=()) -> MixingProfile:
    """Evolve the start distributions and record the worst-case distance.

    Args:
        starts: start set, see :func:`start_matrix`; ``"auto"`` picks
            ``"all"`` for n <= 512 and ``"single:0"`` otherwise.
        t_max: step budget, default ``50 * n**2``.
        record_every: recording stride, default ``max(1, t_max // 4096)``.
        eps: epsilons whose exact mixing times are wanted.  Evolution stops
            once the smallest one is reached.

    Raises:
        NotMixedError: some epsilon in ``eps`` was not reached by ``t_max``.
    """
    if isinstance(starts, str) and starts == "auto":
        starts = default_starts(g)
    t_max = int(50 * g.n ** 2 if t_max is None else t_max)
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    if record_every is None:
        record_every = max(1, t_max // 4096)
    D, label = start_matrix(g, starts)
    eps_list = sorted({float(e) for e in np.atleast_1d(eps)}, reverse=True)
    eps_arr = np.asarray(eps_list, dtype=np.float64)
    rec_t, rec_d, cross, t_end, d_end, D_end = _kernels.evolve_profile(
        D, g.hub_array, g.partner_array, w.p, w.q, w.a, loop_vector(g, w),
        t_max, int(record_every), eps_arr)
    drift = float(np.max(np.abs(D_end.sum(axis=1) - D.sum(axis=1))))
    if drift > 1e-9:
        raise NumericalDriftError(f"mass drifted by {drift:.3g} after {t_end} steps")
    tmix = {e: (int(c) if c >= 0 else None) for e, c in zip(eps_list, cross)}
    profile = MixingProfile(serialize(g), label, rec_t.copy(), rec_d.copy(), tmix)
    missing = [e for e, c in tmix.items() if c is None]
    if missing:
        raise NotMixedError(t_max, float(d_end), profile)
    return profile


def mixing_time(g: PerturbedCycle, w: WalkParams, eps: float = 0.25, starts="auto", t_max=None) -> int:
    """Least t with ``d(t) <= eps`` over the start set."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    profile = distance_profile(g, w, starts=starts, t_max=t_max, eps=[eps])
    return profile.tmix[float(eps)]


def pairwise_distance(g: PerturbedCycle, w: WalkParams, t: int) -> float:
    """``max_{x,y} TV(P^t(x,.), P^t(y,.))`` by dense matrix powering (small n)."""
    if g.n > 256:
        raise ValueError("pairwise distance uses dense powers; keep n <= 256")
    Pt = np.linalg.matrix_power(transition_matrix(g, w, "dense"), int(t))
    diff = np.abs(Pt[:, None, :] - Pt[None, :, :]).sum(axis=2)
    return 0.5 * float(diff.max())


def exponent_fit(points) -> tuple[float, float, float]:
    """Least-squares line through ``(log n, log t)``.

    Returns (slope, intercept, rms residual), natural logarithms throughout.
    """
    pts = np.asarray(list(points), dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise ArityError("exponent fit needs at least 3 (n, t) points")
    if len(np.unique(pts[:, 0])) != pts.shape[0]:
        raise ValueError("n values must be distinct")
    x, y = np.log(pts[:, 0]), np.log(pts[:, 1])
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((y - A @ np.array([slope, intercept])) ** 2)))
    return float(slope), float(intercept), resid
