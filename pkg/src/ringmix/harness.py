"""Reproducible mixing-time campaigns with a resumable JSON-lines store.

A campaign is a list of cells.  Each cell is one instance and one mixing-time
computation; cells are computed by a thread pool (the compiled kernels release
the GIL) and handed to a single writer in cell order, so the store is the same
for any worker count.  The first line of a store is a header holding the
schema version and the campaign configuration; every later line is one
record, flushed as soon as it is written.

Records carry their wall-clock cost, which is not reproducible; the canonical
export drops it and sorts by key, and that export is what reruns reproduce
byte for byte.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import CampaignError, InvalidInstanceError, NotMixedError, SchemaError
from .graph import PRNG_ID, PerturbedCycle, derive_seed, make_rng, sample_instance, serialize
from .kernel import WalkParams
from .mixing import distance_profile, exponent_fit

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass
class SweepRecord:
    """One computed (or skipped) cell."""

    instance: str
    n: int
    k: int
    lengths: list
    positions: list
    p: float
    q: float
    a: float
    eps: float
    starts: str
    tmix: int | None
    not_mixed: bool
    seed: int
    x: int | None = None
    y: int | None = None
    last_d: float | None = None
    flag: str | None = None
    wall_time: float = 0.0
    prng: str = PRNG_ID
    schema_version: int = SCHEMA_VERSION

    @property
    def key(self):
        return (self.instance, self.p, self.q, self.a, self.eps, self.starts)

    def to_json(self, canonical=False) -> str:
        d = asdict(self)
        if canonical:
            d.pop("wall_time")
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class Cell:
    """Work item: an instance (or a reason it could not be built) plus its grid position."""

    n: int
    seed: int
    graph: PerturbedCycle | None
    x: int | None = None
    y: int | None = None
    label: str | None = None
    flag: str | None = None

    @property
    def instance(self):
        return serialize(self.graph) if self.graph is not None else self.label


def _record_key(cell, w, eps, starts):
    return (cell.instance, w.p, w.q, w.a, float(eps), starts)


def compute_cell(cell: Cell, w: WalkParams, eps: float, starts: str, t_max=None) -> SweepRecord:
    """Mixing time of one cell; a budget overrun becomes a not-mixed record."""
    base = dict(instance=cell.instance, n=cell.n, p=w.p, q=w.q, a=w.a, eps=float(eps),
                starts=starts, seed=int(cell.seed), x=cell.x, y=cell.y, flag=cell.flag)
    g = cell.graph
    if g is None:
        return SweepRecord(k=0, lengths=[], positions=[], tmix=None, not_mixed=False, **base)
    base.update(k=g.k, lengths=list(g.lengths), positions=list(g.hubs))
    t0 = time.perf_counter()
    try:
        prof = distance_profile(g, w, starts=starts, t_max=t_max, eps=[eps])
        tmix, last_d, not_mixed = prof.tmix[float(eps)], None, False
    except NotMixedError as exc:
        tmix, last_d, not_mixed = None, exc.last_d, True
    return SweepRecord(tmix=tmix, not_mixed=not_mixed, last_d=last_d,
                       wall_time=time.perf_counter() - t0, **base)


class Store:
    """Append-only JSON-lines record store bound to one campaign configuration."""

    def __init__(self, path, config: dict):
        self.path = os.fspath(path)
        self.config = config
        self._records = []
        if os.path.exists(self.path) and os.path.getsize(self.path) > 0:
            self._load()
        else:
            os.makedirs(os.path.dirname(os.path.abspath(self.path)), exist_ok=True)
            with open(self.path, "w") as fh:
                fh.write(json.dumps({"schema_version": SCHEMA_VERSION, "config": config}, sort_keys=True) + "\n")

    @staticmethod
    def read_header(path) -> dict:
        with open(path) as fh:
            header = json.loads(fh.readline())
        if header.get("schema_version") != SCHEMA_VERSION:
            raise SchemaError(f"{path}: schema version {header.get('schema_version')} != {SCHEMA_VERSION}")
        return header

    def _load(self):
        header = self.read_header(self.path)
        if header["config"] != self.config:
            raise SchemaError(f"{self.path} was written by a different campaign configuration")
        with open(self.path, "rb") as fh:
            lines = fh.read().split(b"\n")
        good_bytes = len(lines[0]) + 1
        body = lines[1:]
        for i, raw in enumerate(body):
            if not raw:
                if i == len(body) - 1:
                    continue
                bad = True
            else:
                try:
                    d = json.loads(raw)
                    bad = d.get("schema_version") != SCHEMA_VERSION
                except json.JSONDecodeError:
                    bad = True
            if bad:
                if any(body[i + 1:]):
                    raise SchemaError(f"{self.path}: unreadable record in the middle of the store")
                logger.warning("%s: dropping corrupted trailing line after %d records", self.path, len(self._records))
                with open(self.path, "r+b") as fh:
                    fh.truncate(good_bytes)
                break
            self._records.append(SweepRecord.from_dict(d))
            good_bytes += len(raw) + 1

    @property
    def records(self):
        return list(self._records)

    def keys(self):
        return {r.key for r in self._records}

    def append(self, rec: SweepRecord):
        with open(self.path, "a") as fh:
            fh.write(rec.to_json() + "\n")
            fh.flush()
        self._records.append(rec)


def canonical_lines(records) -> list:
    """Records without wall time, sorted by key: the reproducible form."""
    recs = sorted(records, key=lambda r: (r.instance, r.p, r.q, r.a, r.eps, r.starts))
    return [r.to_json(canonical=True) for r in recs]


def export_canonical(records, path):
    with open(path, "w") as fh:
        for line in canonical_lines(records):
            fh.write(line + "\n")


def export_csv(records, path):
    """Heatmap table with columns ``x,y,tmix``; tmix is empty for unmixed or skipped cells."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "tmix"])
        for r in sorted(records, key=lambda r: (r.x if r.x is not None else -1, r.y if r.y is not None else -1)):
            writer.writerow(["" if r.x is None else r.x, "" if r.y is None else r.y,
                             "" if r.tmix is None else r.tmix])


def run_cells(cells, w: WalkParams, eps: float, starts: str, store: Store | None = None,
              threads: int = 1, t_max=None, limit: int | None = None) -> list:
    """Compute every cell not already in ``store`` and return all records.

    Args:
        limit: stop after this many new records (used to emulate an
            interruption).
    """
    done = store.keys() if store is not None else set()
    todo = []
    seen = set(done)
    for c in cells:
        key = _record_key(c, w, eps, starts)
        if key not in seen:
            seen.add(key)
            todo.append(c)
    if limit is not None:
        todo = todo[:limit]
    out = store.records if store is not None else []
    logger.info("%d cells to compute, %d already stored", len(todo), len(done))
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        for rec in pool.map(lambda c: compute_cell(c, w, eps, starts, t_max), todo):
            if store is not None:
                store.append(rec)
            out.append(rec)
    return out


def _place_edges(n, lengths, starts_at):
    pairs = [(int(u) % n, (int(u) + int(l)) % n) for u, l in zip(starts_at, lengths)]
    return PerturbedCycle.from_pairs(n, pairs)


def random_placement(n: int, lengths, seed, max_tries: int = 1000) -> PerturbedCycle:
    """Edges of the given cycle lengths at uniform positions, resampled until hubs are distinct."""
    rng = make_rng(seed)
    for _ in range(max_tries):
        try:
            return _place_edges(n, lengths, rng.integers(0, n, size=len(lengths)))
        except InvalidInstanceError:
            continue
    raise InvalidInstanceError(f"no valid placement of lengths {list(lengths)} on n={n}")


def length_cells(n: int, k: int = 2, placement_seed: int = 0, step: int = 1):
    if n < 8:
        raise InvalidInstanceError("length sweeps need n >= 8")
    if k != 2:
        raise ValueError("length sweeps are two-dimensional (k=2)")
    grid = range(1, n // 2 + 1, max(1, int(step)))
    cells = []
    for l1 in grid:
        for l2 in grid:
            seed = derive_seed(placement_seed, l1, l2)
            cells.append(Cell(n, seed, random_placement(n, (l1, l2), seed), x=l1, y=l2))
    return cells


def sweep_lengths(n: int, w: WalkParams, eps: float = 0.25, k: int = 2, placement_seed: int = 0,
                  step: int = 1, starts: str = "single:0", store_path=None, threads: int = 1,
                  t_max=None, limit=None) -> list:
    """Grid over both edge lengths in ``[1, n/2]``, one random placement per cell."""
    config = dict(campaign="sweep-lengths", n=n, k=k, placement_seed=placement_seed, step=step,
                  starts=starts, eps=eps, t_max=t_max, **w.as_dict())
    store = Store(store_path, config) if store_path else None
    return run_cells(length_cells(n, k, placement_seed, step), w, eps, starts, store, threads, t_max, limit)


def position_cells(n: int, lengths, step: int | None = None):
    lengths = [int(l) for l in lengths]
    k = len(lengths)
    if k < 2:
        raise ValueError("position sweeps need at least two edges")
    step = max(1, n // 20) if step is None else int(step)
    cells = []
    for pos in np.ndindex(*([len(range(0, n, step))] * (k - 1))):
        starts_at = [0] + [i * step for i in pos]
        xy = starts_at[1:] + [None]
        try:
            cells.append(Cell(n, 0, _place_edges(n, lengths, starts_at), x=xy[0], y=xy[1]))
        except InvalidInstanceError:
            label = f"n={n} lengths={','.join(map(str, lengths))} starts={','.join(map(str, starts_at))}"
            cells.append(Cell(n, 0, None, x=xy[0], y=xy[1], label=label, flag="overlap"))
    return cells


def sweep_positions(n: int, lengths, w: WalkParams, eps: float = 0.25, step: int | None = None,
                    starts: str = "single:0", store_path=None, threads: int = 1, t_max=None,
                    limit=None) -> list:
    """First edge anchored at 0; grid over the other edges' left endpoints.

    Cells whose hubs collide are recorded with ``flag="overlap"`` and no
    mixing time.
    """
    config = dict(campaign="sweep-positions", n=n, lengths=[int(l) for l in lengths], step=step,
                  starts=starts, eps=eps, t_max=t_max, **w.as_dict())
    store = Store(store_path, config) if store_path else None
    return run_cells(position_cells(n, lengths, step), w, eps, starts, store, threads, t_max, limit)


def placement_batch(n: int, lengths, count: int, w: WalkParams, eps: float = 0.25, seed: int = 0,
                    starts: str = "all", store_path=None, threads: int = 1, t_max=None) -> list:
    """Mixing times for ``count`` uniformly random placements of fixed edge lengths."""
    config = dict(campaign="placements", n=n, lengths=[int(l) for l in lengths], count=count,
                  seed=seed, starts=starts, eps=eps, t_max=t_max, **w.as_dict())
    store = Store(store_path, config) if store_path else None
    cells = []
    for i in range(int(count)):
        s = derive_seed(seed, i)
        cells.append(Cell(n, s, random_placement(n, lengths, s), x=i))
    return run_cells(cells, w, eps, starts, store, threads, t_max)


def scaling_exponent(k: int) -> float:
    return (k + 2) / (k + 1)


@dataclass
class SortedCurves:
    """Sorted ``t_mix / n**e`` per n, sampled at common quantiles."""

    k: int
    exponent: float
    quantiles: np.ndarray
    curves: dict
    sorted_values: dict
    reference_n: int | None = None
    normalized: dict = field(default_factory=dict)
    method: str = "linear"


def sorted_scaled_from_records(records_by_n: dict, k: int = 2, reference_n=None, quantiles=None,
                               exponent=None) -> SortedCurves:
    """Sort scaled mixing times and compare them at matching quantiles.

    Cells that did not mix count as ``+inf``; skipped cells are ignored.
    """
    exponent = scaling_exponent(k) if exponent is None else exponent
    qs = np.linspace(0.0, 1.0, 201) if quantiles is None else np.asarray(quantiles, dtype=float)
    curves, values = {}, {}
    for n, recs in sorted(records_by_n.items()):
        vals = np.sort([math.inf if r.not_mixed else r.tmix / n ** exponent
                        for r in recs if r.flag is None])
        if vals.size == 0:
            raise CampaignError(f"no computed cells at n={n}")
        values[n] = vals
        curves[n] = np.quantile(vals, qs, method="linear")
    out = SortedCurves(k, exponent, qs, curves, values, reference_n)
    if reference_n is not None:
        ref = curves[reference_n]
        with np.errstate(invalid="ignore", divide="ignore"):
            out.normalized = {n: c / ref for n, c in curves.items()}
    return out


def sorted_scaled(n_list, w: WalkParams, eps: float = 0.25, k: int = 2, placement_seed: int = 0,
                  step: int = 1, starts: str = "single:0", reference_n=None, store_dir=None,
                  threads: int = 1, t_max=None) -> SortedCurves:
    """Full length sweeps at every n, then sorted scaled curves normalized by ``reference_n``."""
    n_list = sorted(int(n) for n in n_list)
    reference_n = n_list[0] if reference_n is None else reference_n
    by_n = {}
    for n in n_list:
        path = os.path.join(store_dir, f"lengths_n{n}.jsonl") if store_dir else None
        by_n[n] = sweep_lengths(n, w, eps, k, placement_seed, step, starts, path, threads, t_max)
    return sorted_scaled_from_records(by_n, k, reference_n)


@dataclass
class ExponentSummary:
    k: int
    n_list: list
    medians: list
    not_mixed: list
    slope: float
    intercept: float
    residual: float
    records: list = field(repr=False, default_factory=list)

    def to_dict(self):
        d = asdict(self)
        d.pop("records")
        return d


def exponent_campaign(k: int, n_list, instances: int, w: WalkParams, eps: float = 0.25, seed: int = 0,
                      starts: str = "single:0", store_path=None, threads: int = 1, t_max=None,
                      limit=None) -> ExponentSummary:
    """Median mixing time over random instances at each n, then a log-log slope.

    Identical instances (always the case at k=0) are computed once and
    counted with multiplicity.  Unmixed cells count as ``+inf`` in the median.

    Raises:
        CampaignError: at some n the median is unmixed.
    """
    n_list = sorted(int(n) for n in n_list)
    if len(set(n_list)) < 3:
        raise CampaignError("need at least 3 distinct n")
    if instances < 5:
        raise CampaignError("need at least 5 instances per n")
    config = dict(campaign="exponent", k=k, n_list=n_list, instances=instances, seed=seed,
                  starts=starts, eps=eps, t_max=t_max, **w.as_dict())
    store = Store(store_path, config) if store_path else None
    cells = []
    for n in n_list:
        for i in range(int(instances)):
            s = derive_seed(seed, n, i)
            cells.append(Cell(n, s, sample_instance(n, k, s), x=n, y=i))
    records = run_cells(cells, w, eps, starts, store, threads, t_max, limit)
    by_key = {r.key: r for r in records}
    medians, unmixed = [], []
    for n in n_list:
        vals = []
        for c in cells:
            rec = by_key.get(_record_key(c, w, eps, starts)) if c.n == n else None
            if rec is not None:
                vals.append(math.inf if rec.not_mixed else rec.tmix)
        if not vals:
            raise CampaignError(f"no records at n={n}")
        med = float(np.median(vals))
        unmixed.append(int(sum(math.isinf(v) for v in vals)))
        if math.isinf(med):
            raise CampaignError(f"n={n}: median instance did not mix ({unmixed[-1]}/{len(vals)} unmixed)")
        medians.append(med)
    slope, intercept, resid = exponent_fit(zip(n_list, medians))
    return ExponentSummary(k, n_list, medians, unmixed, slope, intercept, resid, records)


def scaling_sanity(n_list, medians, k: int) -> dict:
    """Max/min ratio of the medians scaled by ``n**e`` for the theory exponent, 1 and 2."""
    n = np.asarray(n_list, dtype=float)
    t = np.asarray(medians, dtype=float)
    out = {}
    for name, e in (("theory", scaling_exponent(k)), ("linear", 1.0), ("quadratic", 2.0)):
        scaled = t / n ** e
        out[name] = float(scaled.max() / scaled.min())
    return out


def resume(store_path, threads: int = 1) -> list:
    """Finish the campaign recorded in a store header, skipping completed cells."""
    header = Store.read_header(store_path)
    cfg = dict(header["config"])
    name = cfg.pop("campaign")
    w = WalkParams(cfg.pop("p"), cfg.pop("q"), cfg.pop("a"))
    if name == "sweep-lengths":
        return sweep_lengths(w=w, store_path=store_path, threads=threads, **cfg)
    if name == "sweep-positions":
        return sweep_positions(w=w, store_path=store_path, threads=threads, **cfg)
    if name == "placements":
        return placement_batch(w=w, store_path=store_path, threads=threads, **cfg)
    if name == "exponent":
        return exponent_campaign(w=w, store_path=store_path, threads=threads, **cfg).records
    raise SchemaError(f"unknown campaign {name!r} in {store_path}")
