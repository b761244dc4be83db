import os

import numpy as np
import pytest

from mechamp.cli import main
from mechamp.config import load_config, parse_config_text, resolve_config
from mechamp.csvio import manifest_hash, read_csv, write_csv
from mechamp.errors import ConfigError

MINIMAL = """
schema = 1
scenario = analytics_tables
grid.points = 11   # trailing comment
"""


def test_parse_and_defaults():
    cfg = resolve_config(parse_config_text(MINIMAL))
    assert cfg.scenario == "analytics_tables"
    assert cfg.values["grid.points"] == 11
    assert cfg.values["model.amplification_db"] == 20.0
    assert cfg.threads == 1


def test_unknown_key_rejected():
    raw = parse_config_text(MINIMAL + "\nmodel.bogus = 3\n")
    with pytest.raises(ConfigError, match="unknown keys"):
        resolve_config(raw)


def test_missing_schema_and_bad_values():
    with pytest.raises(ConfigError, match="schema"):
        resolve_config({"scenario": "analytics_tables"})
    with pytest.raises(ConfigError, match="unsupported schema"):
        resolve_config({"schema": "2", "scenario": "analytics_tables"})
    with pytest.raises(ConfigError, match="cannot parse"):
        resolve_config({"schema": "1", "scenario": "analytics_tables", "grid.points": "many"})
    with pytest.raises(ConfigError, match="unknown scenario"):
        resolve_config({"schema": "1", "scenario": "fig9"})


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config_text("a = 1\na = 2\n")


def test_float_list_parsing():
    raw = {"schema": "1", "scenario": "figS3_squeezed_cavity", "sweep.g": "0.1, 0.2,0.5"}
    cfg = resolve_config(raw)
    assert cfg.values["sweep.g"] == [0.1, 0.2, 0.5]
    with pytest.raises(ConfigError):
        resolve_config({**raw, "sweep.g": " , "})


def test_overrides_and_out_dir(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text(MINIMAL)
    cfg = load_config(str(path), overrides={"grid.points": "21"}, out_dir="elsewhere", threads=2)
    assert cfg.values["grid.points"] == 21
    assert cfg.out_dir == "elsewhere"
    assert cfg.threads == 2


def test_threads_env_default(tmp_path, monkeypatch):
    monkeypatch.setenv("MECHAMP_THREADS", "3")
    path = tmp_path / "c.cfg"
    path.write_text(MINIMAL)
    assert load_config(str(path)).threads == 3


def test_csv_roundtrip_and_determinism(tmp_path):
    cols = {"t": np.array([0.0, 0.5, 1.0]), "y": np.array([1.0, -2.25e-7, 3.5])}
    p1 = tmp_path / "a.csv"
    p2 = tmp_path / "b.csv"
    write_csv(str(p1), cols, {"curve": "demo", "g": 0.1})
    write_csv(str(p2), cols, {"curve": "demo", "g": 0.1})
    assert p1.read_bytes() == p2.read_bytes()
    meta, data = read_csv(str(p1))
    assert meta["curve"] == "demo"
    assert np.array_equal(data["t"], cols["t"])
    assert np.array_equal(data["y"], cols["y"])


def test_csv_rejects_complex_and_ragged(tmp_path):
    with pytest.raises(ValueError):
        write_csv(str(tmp_path / "x.csv"), {"z": np.array([1j, 2j])})
    with pytest.raises(ValueError):
        write_csv(str(tmp_path / "y.csv"), {"a": [1.0], "b": [1.0, 2.0]})


def test_manifest_hash_stable():
    m = {"b": 1, "a": {"y": [1, 2], "x": 0.5}}
    assert manifest_hash(m) == manifest_hash({"a": {"x": 0.5, "y": [1, 2]}, "b": 1})


def test_cli_exit_codes(tmp_path, capsys):
    # missing config file -> config error
    assert main(["run", str(tmp_path / "nope.cfg")]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("schema = 1\nscenario = analytics_tables\nnot.a.key = 1\n")
    assert main(["run", str(bad)]) == 2
    # kind filter: analytics config under `sweep`
    good = tmp_path / "an.cfg"
    good.write_text("schema = 1\nscenario = analytics_tables\ngrid.points = 11\n")
    assert main(["sweep", str(good)]) == 2
    # malformed override
    assert main(["run", str(good), "--override", "oops"]) == 2


def test_cli_runs_analytics(tmp_path):
    cfgfile = tmp_path / "an.cfg"
    cfgfile.write_text(
        "schema = 1\nscenario = analytics_tables\ngrid.points = 31\n"
        f"out_dir = {tmp_path / 'out'}\n"
    )
    assert main(["analytics", str(cfgfile)]) == 0
    files = sorted(os.listdir(tmp_path / "out"))
    assert "manifest.json" in files
    assert "analytics_kernels.csv" in files
    meta, data = read_csv(str(tmp_path / "out" / "analytics_kernels.csv"))
    assert len(data["omega"]) == 31
    assert "manifest_sha256" in meta
