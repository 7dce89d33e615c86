import json
import logging

import numpy as np
import pytest

from ringmix import CampaignError, SchemaError, WalkParams, mixing_time, sample_instance
from ringmix import harness
from ringmix.harness import (SweepRecord, Store, canonical_lines, exponent_campaign, export_canonical, export_csv,
                             placement_batch, resume, scaling_sanity, sorted_scaled, sorted_scaled_from_records,
                             sweep_lengths, sweep_positions)

W = WalkParams()


def test_length_sweep_grid_and_lengths():
    recs = sweep_lengths(24, W, step=4)
    grid = list(range(1, 13, 4))
    assert [(r.x, r.y) for r in recs] == [(a, b) for a in grid for b in grid]
    for r in recs:
        assert sorted(abs(l) for l in r.lengths) == sorted((r.x, r.y))
        assert r.prng == "numpy.random.PCG64" and r.starts == "single:0"
        assert r.tmix is not None and not r.not_mixed


def test_length_sweep_rejects_tiny_n():
    with pytest.raises(ValueError):
        sweep_lengths(6, W)


def test_position_sweep_flags_overlaps():
    recs = sweep_positions(100, (20, 30, 40), W, step=25)
    flagged = [r for r in recs if r.flag == "overlap"]
    assert flagged and all(r.tmix is None for r in flagged)
    ok = [r for r in recs if r.flag is None]
    assert ok and all(r.positions[0] == 0 and r.tmix for r in ok)
    assert len({r.key for r in recs}) == len(recs)


def test_store_round_trip(tmp_path):
    path = tmp_path / "s.jsonl"
    recs = sweep_lengths(20, W, step=3, store_path=path)
    lines = path.read_text().splitlines()
    header = json.loads(lines[0])
    assert header["schema_version"] == harness.SCHEMA_VERSION
    assert header["config"]["campaign"] == "sweep-lengths"
    assert len(lines) == len(recs) + 1
    again = Store(path, header["config"])
    assert canonical_lines(again.records) == canonical_lines(recs)


def test_rerun_is_byte_identical(tmp_path):
    a = sweep_lengths(20, W, step=2, placement_seed=5)
    b = sweep_lengths(20, W, step=2, placement_seed=5)
    export_canonical(a, tmp_path / "a.jsonl")
    export_canonical(b, tmp_path / "b.jsonl")
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()
    c = sweep_lengths(20, W, step=2, placement_seed=6)
    assert canonical_lines(c) != canonical_lines(a)


def test_thread_count_does_not_change_results():
    one = sweep_lengths(30, W, step=3, threads=1)
    many = sweep_lengths(30, W, step=3, threads=4)
    assert canonical_lines(one) == canonical_lines(many)
    assert [r.key for r in one] == [r.key for r in many]


def _strip_wall(path):
    lines = path.read_text().splitlines()
    out = [lines[0]]
    for line in lines[1:]:
        d = json.loads(line)
        d.pop("wall_time")
        out.append(json.dumps(d, sort_keys=True))
    return out


def test_interrupt_and_resume_equals_uninterrupted(tmp_path):
    full = tmp_path / "full.jsonl"
    part = tmp_path / "part.jsonl"
    sweep_lengths(20, W, step=2, store_path=full)
    sweep_lengths(20, W, step=2, store_path=part, limit=12)
    assert len(part.read_text().splitlines()) == 13
    resume(part)
    assert _strip_wall(part) == _strip_wall(full)


def test_resume_on_complete_store_is_noop(tmp_path):
    path = tmp_path / "s.jsonl"
    sweep_positions(60, (10, 20), W, step=10, store_path=path)
    before = path.read_bytes()
    resume(path)
    assert path.read_bytes() == before


def test_corrupted_trailing_line(tmp_path, caplog):
    path = tmp_path / "s.jsonl"
    full = sweep_lengths(16, W, step=3, store_path=path)
    good = path.read_bytes()
    with open(path, "ab") as fh:
        fh.write(b'{"instance": "n=16 k=2 hu')
    with caplog.at_level(logging.WARNING, logger="ringmix.harness"):
        store = Store(path, json.loads(good.splitlines()[0])["config"])
    assert "corrupted" in caplog.text
    assert path.read_bytes() == good
    assert canonical_lines(store.records) == canonical_lines(full)


def test_corrupted_record_midway_is_refused(tmp_path):
    path = tmp_path / "s.jsonl"
    sweep_lengths(16, W, step=3, store_path=path)
    lines = path.read_text().splitlines()
    lines[2] = "not json"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(SchemaError):
        resume(path)


def test_schema_mismatch(tmp_path):
    path = tmp_path / "s.jsonl"
    sweep_lengths(16, W, step=5, store_path=path)
    lines = path.read_text().splitlines()
    header = json.loads(lines[0])
    header["schema_version"] = 999
    path.write_text("\n".join([json.dumps(header)] + lines[1:]) + "\n")
    with pytest.raises(SchemaError):
        resume(path)


def test_config_mismatch(tmp_path):
    path = tmp_path / "s.jsonl"
    sweep_lengths(16, W, step=5, store_path=path)
    with pytest.raises(SchemaError):
        sweep_lengths(16, W, step=4, store_path=path)


def test_heatmap_csv(tmp_path):
    recs = sweep_lengths(16, W, step=5)
    export_csv(recs, tmp_path / "h.csv")
    lines = (tmp_path / "h.csv").read_text().splitlines()
    assert lines[0] == "x,y,tmix" and len(lines) == len(recs) + 1
    x, y, t = lines[1].split(",")
    assert int(t) > 0


def test_not_mixed_cells_recorded():
    recs = sweep_lengths(16, W, step=5, t_max=3)
    assert all(r.not_mixed and r.tmix is None and r.last_d > 0.25 for r in recs)


def test_sorted_curves_reference_normalizes_to_one():
    by_n = {n: sweep_lengths(n, W, step=max(1, n // 40)) for n in (40, 80)}
    curves = sorted_scaled_from_records(by_n, k=2, reference_n=40)
    np.testing.assert_allclose(curves.normalized[40], 1.0)
    for n in (40, 80):
        assert np.all(np.diff(curves.curves[n]) >= 0)
        assert curves.sorted_values[n].size == len(by_n[n])
    assert curves.exponent == pytest.approx(4 / 3)


def test_sorted_scaled_end_to_end(tmp_path):
    out = tmp_path / "curves"  # created on demand
    curves = sorted_scaled([24, 32], W, step=4, store_dir=out)
    assert set(curves.curves) == {24, 32} and curves.reference_n == 24
    assert (out / "lengths_n24.jsonl").exists()


def test_plain_cycle_flat_under_quadratic_scaling():
    scaled = [mixing_time(sample_instance(n, 0, 0), W, 0.25, starts="single:0") / n ** 2 for n in (50, 100, 200, 400)]
    assert max(scaled) / min(scaled) < 1.05


def test_exponent_campaign_plain_cycle():
    summary = exponent_campaign(0, [40, 80, 160], 5, W)
    assert 1.85 <= summary.slope <= 2.15
    assert len(summary.records) == 3  # identical instances computed once
    assert summary.not_mixed == [0, 0, 0]


def test_exponent_campaign_errors():
    with pytest.raises(CampaignError):
        exponent_campaign(1, [40, 80], 5, W)
    with pytest.raises(CampaignError):
        exponent_campaign(1, [40, 80, 160], 4, W)
    with pytest.raises(CampaignError):
        exponent_campaign(1, [40, 80, 160], 5, W, t_max=5)


def test_exponent_campaign_resume(tmp_path):
    path = tmp_path / "e.jsonl"
    full = exponent_campaign(1, [40, 60, 90], 5, W, seed=3)
    with pytest.raises(CampaignError):
        # interrupted before any n=90 cell: no summary possible yet
        exponent_campaign(1, [40, 60, 90], 5, W, seed=3, store_path=path, limit=7)
    resumed = resume(path)
    assert canonical_lines(resumed) == canonical_lines(full.records)


def test_placement_batch_deterministic():
    a = placement_batch(120, (20, 30, 45), 4, W, seed=2, starts="hubs")
    b = placement_batch(120, (20, 30, 45), 4, W, seed=2, starts="hubs")
    assert canonical_lines(a) == canonical_lines(b)
    assert all(sorted(abs(l) for l in r.lengths) == [20, 30, 45] for r in a)


def test_scaling_sanity_synthetic():
    ns = [200, 800, 3200]
    ratios = scaling_sanity(ns, [5 * n ** 1.5 for n in ns], 1)
    assert ratios["theory"] == pytest.approx(1)
    assert ratios["linear"] > 3 and ratios["quadratic"] > 3


def test_scaling_sanity_on_measured_medians():
    # a 64x range in n: under the wrong exponent the scaled medians drift by ~8x
    summary = exponent_campaign(1, [100, 800, 6400], 5, W, seed=11)
    ratios = scaling_sanity(summary.n_list, summary.medians, 1)
    assert ratios["linear"] > 3 and ratios["quadratic"] > 3
    assert ratios["theory"] < min(ratios["linear"], ratios["quadratic"])


def test_record_key_excludes_run_metadata():
    r = SweepRecord("x", 10, 1, [3], [0, 3], 0.5, 0.25, 0.25, 0.25, "single:0", 7, False, 1, wall_time=3.0)
    r2 = SweepRecord("x", 10, 1, [3], [0, 3], 0.5, 0.25, 0.25, 0.25, "single:0", 7, False, 1, wall_time=9.0)
    assert r.key == r2.key and r.to_json(canonical=True) == r2.to_json(canonical=True)
