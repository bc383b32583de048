"""Pipeline orchestration: stage order, artifacts, report, reproducibility."""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path

import pytest

from aerosurvey import __version__
from aerosurvey.errors import InvalidRankError, PipelineStageError
from aerosurvey.pipeline import (
    PipelineConfig,
    apply_seed_override,
    config_hash,
    run_pipeline,
)
from aerosurvey.suspension import FlightPlan, SimConfig, SuspensionGeometry

STAGE_ORDER = ("simulate", "qc_d4", "qc_diurnal", "qc_tie", "qc_nasvd",
               "grid_make", "grid_compare")


def write_small_plan(tmp_path: Path) -> str:
    # two short lines + one tie keeps failure-path runs quick
    plan = FlightPlan(n_lines=2, line_length_m=150.0, tie_lines=1)
    p = tmp_path / "plan.json"
    p.write_text(json.dumps(plan.to_dict()))
    return str(p)


@pytest.fixture(scope="module")
def default_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("pipe_default")
    return out, run_pipeline(PipelineConfig(out_dir=out))


# --- default run ---

def test_default_run_passes_every_stage(default_run):
    _, report = default_run
    assert tuple(s.name for s in report.stages) == STAGE_ORDER
    assert all(s.passed for s in report.stages)
    assert report.overall_pass


def test_default_run_artifacts_exist(default_run):
    out, report = default_run
    for stage in report.stages:
        for art in stage.artifacts:
            assert (out / art).is_file(), f"{stage.name} missing {art}"
    # the line splits land in per-role subdirectories
    for name in ("flights/L1.csv", "flights/L4.csv", "ties/T1.csv"):
        assert (out / name).is_file()


def test_default_report_json_matches_returned_report(default_run):
    out, report = default_run
    on_disk = json.loads((out / "report.json").read_text())
    assert on_disk == report.to_dict()
    assert on_disk["pass"] is True
    assert on_disk["schema_version"] == "1"
    assert on_disk["tool_version"] == __version__
    assert on_disk["seed"] == SimConfig().seed
    digest = on_disk["config_sha256"]
    assert len(digest) == 64 and set(digest) <= set("0123456789abcdef")
    for stage in on_disk["stages"]:
        assert set(stage) == {"name", "pass", "stats", "artifacts"}


def test_default_run_stage_stats(default_run):
    _, report = default_run
    by_name = {s.name: s for s in report.stages}
    sim = by_name["simulate"].stats
    assert sim["n_flight_lines"] == 4
    assert sim["n_tie_lines"] == 1
    assert sim["max_straight_roll_deg"] <= 5.0
    assert sim["max_straight_pitch_deg"] <= 5.0
    d4 = by_name["qc_d4"].stats
    assert d4["flagged_count"] == 0
    assert d4["max_abs_d4"] < d4["threshold"]
    assert by_name["qc_nasvd"].stats["energy_fraction"] >= 0.8
    assert by_name["qc_tie"].stats["n"] >= 4   # one tie crossing per line
    assert by_name["grid_make"].stats["fine_valid_fraction"] > 0.5


# --- config hashing and seed override ---

def test_config_hash_ignores_output_location(tmp_path):
    plan, geo, sim = FlightPlan(), SuspensionGeometry(), SimConfig()
    a = config_hash(plan, geo, sim, PipelineConfig(out_dir=tmp_path / "a"))
    b = config_hash(plan, geo, sim, PipelineConfig(out_dir=tmp_path / "b"))
    assert a == b
    # anything that changes the outputs changes the digest
    assert config_hash(plan, geo, replace(sim, seed=1), PipelineConfig()) != a
    assert config_hash(plan, geo, sim,
                       PipelineConfig(tie_tolerance=2.0)) != a
    assert config_hash(FlightPlan(n_lines=2), geo, sim,
                       PipelineConfig()) != a


def test_apply_seed_override(monkeypatch):
    cfg = SimConfig()
    monkeypatch.delenv("AEROSURVEY_SEED", raising=False)
    assert apply_seed_override(cfg) is cfg
    monkeypatch.setenv("AEROSURVEY_SEED", "123")
    assert apply_seed_override(cfg).seed == 123
    monkeypatch.setenv("AEROSURVEY_SEED", "not-a-seed")
    with pytest.raises(ValueError):
        apply_seed_override(cfg)


def test_seed_env_reaches_report(tmp_path, monkeypatch):
    monkeypatch.setenv("AEROSURVEY_SEED", "77")
    report = run_pipeline(PipelineConfig(out_dir=tmp_path / "out",
                                         plan_path=write_small_plan(tmp_path)))
    assert report.seed == 77


# --- config files and validation ---

def test_plan_file_is_honored(tmp_path):
    report = run_pipeline(PipelineConfig(out_dir=tmp_path / "out",
                                         plan_path=write_small_plan(tmp_path)))
    sim = {s.name: s for s in report.stages}["simulate"].stats
    assert sim["n_flight_lines"] == 2
    assert sim["n_tie_lines"] == 1


def test_missing_config_file_rejected(tmp_path):
    with pytest.raises(FileNotFoundError):
        PipelineConfig(plan_path=str(tmp_path / "nope.json"))


def test_pipeline_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(tie_field="BOGUS")
    with pytest.raises(ValueError):
        PipelineConfig(cell_fine=0.0)


def test_pipeline_config_dict_round_trip(tmp_path):
    cfg = PipelineConfig(out_dir=str(tmp_path), tie_tolerance=2.5, nasvd_k=6)
    assert PipelineConfig.from_dict(cfg.to_dict()) == cfg


# --- failure paths ---

def test_failing_gate_does_not_abort(tmp_path):
    # an unmeetable tie tolerance fails that stage but the run continues
    cfg = PipelineConfig(out_dir=tmp_path / "out",
                         plan_path=write_small_plan(tmp_path),
                         tie_tolerance=1e-12)
    report = run_pipeline(cfg)
    by_name = {s.name: s for s in report.stages}
    assert not by_name["qc_tie"].passed
    assert tuple(s.name for s in report.stages) == STAGE_ORDER
    assert not report.overall_pass
    on_disk = json.loads((tmp_path / "out" / "report.json").read_text())
    assert on_disk["pass"] is False


def test_raising_stage_wraps_with_partial_report(tmp_path):
    # rank above the channel count raises inside the NASVD stage
    cfg = PipelineConfig(out_dir=tmp_path / "out",
                         plan_path=write_small_plan(tmp_path),
                         nasvd_k=64)
    with pytest.raises(PipelineStageError) as exc_info:
        run_pipeline(cfg)
    err = exc_info.value
    assert err.stage == "qc_nasvd"
    assert isinstance(err.cause, InvalidRankError)
    done = tuple(s.name for s in err.partial_report.stages)
    assert done == STAGE_ORDER[:4]
    # no consolidated report for an aborted run
    assert not (tmp_path / "out" / "report.json").exists()


# --- reproducibility ---

def test_same_config_same_bytes(tmp_path):
    plan = write_small_plan(tmp_path)
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        run_pipeline(PipelineConfig(out_dir=out, plan_path=plan))
        outs.append(out)
    files_a = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*")
                     if p.is_file())
    files_b = sorted(p.relative_to(outs[1]) for p in outs[1].rglob("*")
                     if p.is_file())
    assert files_a == files_b
    for rel in files_a:
        assert (outs[0] / rel).read_bytes() == (outs[1] / rel).read_bytes(), rel
