import json
import subprocess
import sys

import pytest

from petallab.cli import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    SEED_ENV,
    ConfigError,
    config_from_dict,
    load_config,
    run,
)


def test_oracle_disk_metrics(capsys):
    assert run(["oracle", "disk-metrics", "--z", "0,0", "--w", "0.5,0"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert round(out["distance"], 5) == 0.54931
    assert out["density"] == 1.0


def test_oracle_strip_harmonic(capsys):
    assert run(["oracle", "strip-harmonic", "--z", "0,0.25", "--y0", "0", "--y1", "1"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["harmonic_measure"] == pytest.approx(0.25)


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["oracle", "disk-metrics", "--z", "x"],
    ["check", "--name", "T99"],
    ["check", "--name", "T1"],
    ["estimate", "green"],
])
def test_usage_errors(argv):
    assert run(argv) == EXIT_USAGE


def test_config_errors(tmp_path, fixtures_dir):
    bad = tmp_path / "bad.toml"
    bad.write_text("x = 1\n")
    assert run(["sweep", "--config", str(bad)]) == EXIT_CONFIG
    bad.write_text("not toml [[[")
    assert run(["sweep", "--config", str(bad)]) == EXIT_CONFIG
    assert run(["sweep", "--config", str(tmp_path / "missing.toml")]) == EXIT_CONFIG
    assert run(["check", "--name", "T7", "--config", str(fixtures_dir / "slitstrip.toml")]) == EXIT_CONFIG


def test_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run(["check", "--name", "SM-H", "--out", str(blocker / "sub")]) == EXIT_IO


def test_emit_config_round_trip(tmp_path, fixtures_dir):
    target = tmp_path / "effective.toml"
    assert run(["sweep", "--config", str(fixtures_dir / "slitstrip.toml"), "--seed", "5",
                "--emit-config", str(target)]) == EXIT_OK
    again = load_config(target)
    assert again == load_config(fixtures_dir / "slitstrip.toml", seed=5)
    assert again.sweep.wos.seed == 5


def test_seed_priority(monkeypatch, fixtures_dir):
    raw = load_config(fixtures_dir / "slitstrip.toml").to_dict()
    no_seed = {**raw, "wos": {k: v for k, v in raw["wos"].items() if k != "seed"}}
    monkeypatch.delenv(SEED_ENV, raising=False)
    assert config_from_dict(no_seed).sweep.wos.seed == 0
    monkeypatch.setenv(SEED_ENV, "77")
    assert config_from_dict(no_seed).seed_source == "env"
    assert config_from_dict(no_seed).sweep.wos.seed == 77
    assert config_from_dict(raw).sweep.wos.seed == raw["wos"]["seed"]
    assert config_from_dict(raw, seed=3).sweep.wos.seed == 3
    monkeypatch.setenv(SEED_ENV, "seven")
    with pytest.raises(ConfigError):
        config_from_dict(no_seed)


def test_check_and_report_rerender(tmp_path, capsys):
    out = tmp_path / "smg"
    assert run(["check", "--name", "SM-G", "--out", str(out)]) == EXIT_OK
    assert capsys.readouterr().out.startswith("SM-G: pass")
    again = tmp_path / "again"
    assert run(["report", "--input", str(out / "report.json"), "--out", str(again)]) == EXIT_OK
    for name in ("report.csv", "report.json", "report.svg"):
        assert (again / name).read_bytes() == (out / name).read_bytes()


def test_estimate_bounds(capsys, fixtures_dir):
    assert run(["estimate", "bounds", "--config", str(fixtures_dir / "expcusp.toml"), "--t", "-4"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["green_upper_bound"] > 0 and out["distance_lower_bound"] > 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "petallab", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "petallab" in proc.stdout
