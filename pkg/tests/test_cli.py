import json

import numpy as np
import pytest

from vortexlab.cli import export_report, main, run_scenario
from vortexlab.config import load_config, parse_config
from vortexlab.errors import ConfigError, MissingArtifacts

ZERO_FLOW = """
[scenario]
Gamma = 1.0
nu = [0.5]
t0 = 0.02
T = 0.04

[flow]
kind = "zero"

[grid]
N = 256
L = 5.6

[outputs]
times = [0.03, 0.04]
time_unit = "absolute"
format = "csv"

[spectrum]
modes = [0, 1, 2]
count = 3

[burgers]
delta = [0.02, 0.01]
lam = 0.5

[relax]
mode = "linear"
tau_max = 8.0
dtau = 0.01
"""


@pytest.fixture
def zero_config(tmp_path):
    path = tmp_path / "zero.toml"
    path.write_text(ZERO_FLOW)
    return path


def base():
    return {"scenario": {"nu": [0.01], "t0": 0.1, "T": 0.5},
            "flow": {"kind": "linear_strain", "gamma": 1.0},
            "outputs": {"times": [0.2, 0.5]}, "grid": {}, "solver": {}}


def test_missing_flow_kind_names_the_key():
    data = base()
    del data["flow"]["kind"]
    with pytest.raises(ConfigError, match="flow.kind"):
        parse_config(data)


@pytest.mark.parametrize("section,key,value,name", [
    ("scenario", "nu", [], "scenario.nu"),
    ("scenario", "nu", [2.0], "scenario.nu[0]"),
    ("grid", "N", 100, "grid.N"),
    ("solver", "cfl", 1.5, "solver.cfl"),
    ("outputs", "format", "hdf5", "outputs.format"),
    ("flow", "gamma", -1.0, "flow.gamma"),
    ("flow", "U", 1.0, "flow.U"),
])
def test_invalid_entries_name_their_keys(section, key, value, name):
    data = base()
    data[section][key] = value
    with pytest.raises(ConfigError, match=name.replace("[", r"\[").replace("]", r"\]")):
        parse_config(data)


def test_defaults_and_times_in_units_of_t0():
    cfg = parse_config(base())
    assert cfg.Gamma == 1.0 and cfg.N == 256 and cfg.cfl == 0.4 and cfg.window_fraction == 0.4
    assert cfg.times() == [0.2, 0.5]


def test_json_and_toml_give_the_same_configuration(tmp_path, zero_config):
    import tomli
    data = tomli.loads(ZERO_FLOW)
    js = tmp_path / "zero.json"
    js.write_text(json.dumps(data))
    assert load_config(js).resolved() == load_config(zero_config).resolved()


def test_simulate_zero_flow_tracks_lamb_oseen(tmp_path, zero_config):
    run = run_scenario(zero_config, "simulate", tmp_path / "out")
    meta = json.loads((run / "config.json").read_text())
    assert meta["resolved"]["nu"] == [0.5]
    text = (run / "nu_0" / "tracking.csv").read_text().splitlines()
    cols = text[0].split(",")
    for line in text[1:]:
        row = dict(zip(cols, map(float, line.split(","))))
        assert row["l1_vs_lambOseen_z"] <= 1e-6
    assert len(list((run / "nu_0").glob("snap_*.csv"))) == 2


def test_outputs_are_deterministic(tmp_path, zero_config):
    a = run_scenario(zero_config, "simulate", tmp_path / "a")
    b = run_scenario(zero_config, "simulate", tmp_path / "b")
    for name in ("tracking.csv", "snap_001.csv"):
        assert (a / "nu_0" / name).read_bytes() == (b / "nu_0" / name).read_bytes()
    assert (a / "config.json").read_bytes() == (b / "config.json").read_bytes()


def test_environment_overrides_the_output_root(tmp_path, zero_config, monkeypatch):
    monkeypatch.setenv("VORTEXLAB_OUT", str(tmp_path / "env"))
    assert main(["spectrum", "--config", str(zero_config), "--out", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "env" / "spectrum" / "spectrum.csv").exists()
    assert not (tmp_path / "flag").exists()


def test_spectrum_burgers_relax_and_report(tmp_path, zero_config):
    out = tmp_path / "out"
    for cmd in ("spectrum", "burgers", "relax"):
        assert main([cmd, "--config", str(zero_config), "--out", str(out)]) == 0
    report = export_report(out)
    assert report["spectrum_max_error"] <= 1e-3
    assert report["burgers_slope"] > 1
    assert report["relax"]["runs"][0]["beta"] > 0
    # JSON round trip
    text = (out / "report.json").read_text()
    assert json.loads(json.dumps(json.loads(text))) == json.loads(text)
    assert (out / "burgers" / "gap.dat").exists()


def test_report_of_an_empty_directory(tmp_path):
    with pytest.raises(MissingArtifacts):
        export_report(tmp_path)
    assert main(["report", "--out", str(tmp_path)]) == 1


def test_bad_configuration_exits_with_status_two(tmp_path, capsys):
    path = tmp_path / "bad.toml"
    path.write_text("[scenario]\nnu = [0.1]\nt0 = 0.1\nT = 1.0\n[outputs]\ntimes = [0.5]\n")
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert "flow.kind" in capsys.readouterr().err


def test_report_keys_for_a_strain_run(tmp_path):
    cfg = {"scenario": {"nu": [0.004, 0.002], "t0": 0.3, "T": 0.5, "z0": [0.0, 0.0]},
           "flow": {"kind": "linear_strain", "gamma": 1.0},
           "grid": {"N": 256},
           "outputs": {"times": [0.3, 0.4, 0.5], "snapshots": False}}
    path = tmp_path / "strain.json"
    path.write_text(json.dumps(cfg))
    run_scenario(path, "simulate", tmp_path / "out", workers=2)
    report = export_report(tmp_path / "out")
    assert {"theorem1_slope", "quadrupole_ratio", "center_gap_ratio"} <= set(report)
    assert np.isfinite(report["theorem1_slope"])


def test_shipped_configurations_are_valid():
    from pathlib import Path
    root = Path(__file__).resolve().parent.parent / "configs"
    files = sorted(root.glob("*.toml"))
    assert files
    for path in files:
        cfg = load_config(path)
        assert cfg.N == 512 and len(cfg.nu) == 3
