import json
import os
import subprocess
import sys

import pytest

from stampede.cli import main, parse_seeds
from stampede.config import ConfigError, SwarmConfig, dump_config
from stampede.dynamics import DynamicsParams, RandomDensity
from stampede.harness import (
    ROUTE_COMPARE_COLUMNS, SWARM_COMPARE_COLUMNS, cmd_compare, cmd_route_run, cmd_swarm_run, cmd_sweep,
)
from stampede.presets import fleet_pair, stampede_config
from stampede.results import EVENT_COLUMNS, SWEEP_COLUMNS, TIMESERIES_COLUMNS, read_csv


def small(**kw):
    base = dict(n=20, steps=30, params=DynamicsParams(noise_eta=0.05), topology=RandomDensity(0.4))
    base.update(kw)
    return SwarmConfig(**base)


def header_lines(path):
    with open(path) as fh:
        return [ln for ln in fh.read().splitlines() if ln.startswith("#")]


def column_row(path):
    with open(path) as fh:
        return next(ln for ln in fh.read().splitlines() if not ln.startswith("#"))


def snapshot(folder):
    return {name: open(os.path.join(folder, name), "rb").read() for name in sorted(os.listdir(folder))}


def test_pinned_column_orders():
    assert TIMESERIES_COLUMNS == ("t", "phi", "velocity_diameter", "participation_ratio",
                                  "mean_degree_fraction", "phase", "peeled_count")
    assert SWEEP_COLUMNS == ("param", "value", "seed", "final_phase", "mean_phi_window")
    assert EVENT_COLUMNS == ("t_seconds", "event", "edge_id", "vehicle_id", "detail")
    assert SWARM_COMPARE_COLUMNS[:4] == ("seed", "phi_control", "phi_treatment", "delta_phi")
    assert ROUTE_COMPARE_COLUMNS[:4] == ("seed", "destroyed_control", "destroyed_treatment", "delta_destroyed")


def test_swarm_run_zero_steps_is_header_only(tmp_path):
    cmd_swarm_run(small(steps=0), seed=3, out=tmp_path)
    assert column_row(tmp_path / "timeseries.csv") == ",".join(TIMESERIES_COLUMNS)
    assert read_csv(tmp_path / "timeseries.csv") == []
    heads = header_lines(tmp_path / "timeseries.csv")
    assert heads[0] == "# schema_version: 1.0" and heads[-1] == "# seed: 3"
    cfg_echo = json.loads(heads[1][len("# config: "):])
    assert cfg_echo == small(steps=0).to_dict()
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["seed"] == 3 and summary["config"] == small(steps=0).to_dict()
    assert summary["summary"]["steps"] == 0 and summary["summary"]["final_phase"] is None


def test_swarm_run_repeatable_bytes(tmp_path):
    cmd_swarm_run(small(), seed=1, out=tmp_path / "a")
    cmd_swarm_run(small(), seed=1, out=tmp_path / "b")
    assert snapshot(tmp_path / "a") == snapshot(tmp_path / "b")
    rows = read_csv(tmp_path / "a" / "timeseries.csv")
    assert [int(r["t"]) for r in rows] == list(range(1, 31))


def test_swarm_run_stampede_preset(tmp_path):
    doc = cmd_swarm_run(stampede_config(steps=500), seed=0, out=tmp_path)
    assert doc["summary"]["final_phase"] == "Stampede"
    assert read_csv(tmp_path / "timeseries.csv")[-1]["phase"] == "Stampede"


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        cmd_swarm_run(small(steps=1), out=blocker / "sub")


def test_sweep_single_point_matches_swarm_run(tmp_path):
    cfg = small(params=DynamicsParams(noise_eta=0.05, sih_radius=6.0), seeds=(2, 5))
    rows = cmd_sweep(cfg, "sih_radius", 6.0, 6.0, 1, out=tmp_path / "sw")
    for row in rows:
        doc = cmd_swarm_run(cfg, seed=row["seed"], out=tmp_path / f"run{row['seed']}")
        assert row["final_phase"] == doc["summary"]["final_phase"]
        assert row["mean_phi_window"] == doc["summary"]["mean_phi_window"]
    assert [r["seed"] for r in rows] == [2, 5] and rows[0]["param"] == "params.sih_radius"


def test_sweep_sorted_and_parallel_identical(tmp_path):
    cfg = small(seeds=(3, 1, 2))
    cmd_sweep(cfg, "params.sih_radius", 0.0, 10.0, 3, out=tmp_path / "serial")
    cmd_sweep(cfg, "params.sih_radius", 0.0, 10.0, 3, out=tmp_path / "par", workers=2)
    assert snapshot(tmp_path / "serial") == snapshot(tmp_path / "par")
    rows = read_csv(tmp_path / "serial" / "sweep.csv")
    keys = [(float(r["value"]), int(r["seed"])) for r in rows]
    assert keys == sorted(keys) and len(keys) == 9


def test_sweep_rejects_unknown_or_non_numeric_param(tmp_path):
    with pytest.raises(ConfigError, match="unknown parameter"):
        cmd_sweep(small(), "params.warp", 0, 1, 2, out=tmp_path)
    with pytest.raises(ConfigError, match="not numeric"):
        cmd_sweep(small(), "topology.type", 0, 1, 2, out=tmp_path)
    with pytest.raises(ConfigError):
        cmd_sweep(fleet_pair()[0], "spawn_rate", 1, 2, 2, out=tmp_path)


def test_sweep_integer_param(tmp_path):
    rows = cmd_sweep(small(steps=4), "steps", 2, 6, 2, out=tmp_path)
    assert [r["value"] for r in rows] == [2.0, 6.0]


def test_route_run_files(tmp_path):
    ctrl, _ = fleet_pair(seeds=[4])
    doc = cmd_route_run(ctrl, out=tmp_path / "a")
    cmd_route_run(ctrl, out=tmp_path / "b")
    assert snapshot(tmp_path / "a") == snapshot(tmp_path / "b")
    assert column_row(tmp_path / "a" / "events.csv") == ",".join(EVENT_COLUMNS)
    rows = read_csv(tmp_path / "a" / "events.csv")
    assert sum(r["event"] == "destroyed" for r in rows) == doc["summary"]["destroyed"]
    assert header_lines(tmp_path / "a" / "events.csv")[-1] == "# seed: 4"
    with pytest.raises(ConfigError):
        cmd_route_run(small(), out=tmp_path)


def test_compare_identical_configs_zero_deltas(tmp_path):
    cfg = small(seeds=(0, 1, 2))
    doc = cmd_compare(cfg, cfg, out=tmp_path)
    rows = read_csv(tmp_path / "compare.csv")
    assert all(float(r["delta_phi"]) == 0.0 and float(r["delta_participation_ratio"]) == 0.0
               and int(r["delta_peeled"]) == 0 for r in rows)
    assert doc["summary"]["median_delta_phi"] == 0.0
    ctrl, _ = fleet_pair(seeds=range(3))
    doc = cmd_compare(ctrl, ctrl, out=tmp_path / "r")
    assert doc["summary"]["median_delta_destroyed"] == 0.0


def test_compare_kind_mismatch(tmp_path):
    with pytest.raises(ConfigError, match="kind"):
        cmd_compare(small(), fleet_pair()[0], out=tmp_path)


def test_compare_parallel_identical(tmp_path):
    ctrl, treat = fleet_pair(seeds=range(4))
    cmd_compare(ctrl, treat, out=tmp_path / "s")
    cmd_compare(ctrl, treat, out=tmp_path / "p", workers=2)
    assert snapshot(tmp_path / "s") == snapshot(tmp_path / "p")


# --- command line -----------------------------------------------------------

def test_parse_seeds():
    assert parse_seeds("0..3") == [0, 1, 2, 3]
    assert parse_seeds("4,2") == [4, 2] and parse_seeds("7") == [7]
    with pytest.raises(Exception):
        parse_seeds("3..1")


def test_cli_subcommands(tmp_path, capsys):
    swarm = tmp_path / "swarm.json"
    swarm.write_text(dump_config(small()))
    ctrl, treat = fleet_pair(seeds=[0])
    (tmp_path / "c.json").write_text(dump_config(ctrl))
    (tmp_path / "t.json").write_text(dump_config(treat))
    assert main(["swarm-run", "--config", str(swarm), "--seed", "2", "--out", str(tmp_path / "o1")]) == 0
    assert (tmp_path / "o1" / "timeseries.csv").exists()
    assert main(["sweep", "--config", str(swarm), "--param", "params.sih_radius", "--from", "0",
                 "--to", "5", "--steps", "2", "--seeds", "0..1", "--out", str(tmp_path / "o2")]) == 0
    assert len(read_csv(tmp_path / "o2" / "sweep.csv")) == 4
    assert main(["route-run", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path / "o3")]) == 0
    assert main(["compare", "--config", str(tmp_path / "c.json"), "--treatment", str(tmp_path / "t.json"),
                 "--seeds", "0..2", "--out", str(tmp_path / "o4")]) == 0
    assert len(read_csv(tmp_path / "o4" / "compare.csv")) == 3


def test_cli_reports_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "swarm", "colour": 1}')
    assert main(["swarm-run", "--config", str(bad)]) == 2
    assert "colour" in capsys.readouterr().err
    good = tmp_path / "g.json"
    good.write_text(dump_config(small()))
    assert main(["route-run", "--config", str(good)]) == 2


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "s.json"
    cfg.write_text(dump_config(small(steps=3)))
    proc = subprocess.run([sys.executable, "-m", "stampede", "swarm-run", "--config", str(cfg),
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "o" / "summary.json").exists()
