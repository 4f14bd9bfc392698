"""Configuration documents and the command-line front end."""

import json

import pytest

from eitsim import ConfigError
from eitsim.cli import main
from eitsim.config import (build_physics, default_config, parse_config, preset,
                           sweep_values)
from eitsim.constants import TWO_PI


# ---------------------------------------------------------------- config

def test_defaults_parse_and_validate():
    cfg = parse_config("")
    assert cfg.get("scheme") == "B"
    assert cfg.get("pressure_torr") == 15.0


def test_comments_and_blank_lines_ignored():
    cfg = parse_config("""
    # cell setup
    pressure_torr = 25   # helium
    scheme = A
    """)
    assert cfg.get("pressure_torr") == 25.0
    assert cfg.get("scheme") == "A"


def test_unknown_key_reports_line_number():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("scheme = B\nnot_a_key = 1\n")


def test_missing_equals_sign_rejected():
    with pytest.raises(ConfigError, match="key = value"):
        parse_config("pressure_torr 15\n")


def test_unparsable_number_rejected():
    with pytest.raises(ConfigError, match="chi.points"):
        parse_config("chi.points = many\n")


@pytest.mark.parametrize("text,match", [
    ("pressure_torr = -3", "pressure_torr"),
    ("scheme = Q", "scheme"),
    ("chi.min_mhz = 5\nchi.max_mhz = -5", "chi"),
    ("sweep.axis = voltage", "sweep.axis"),
    ("sweep.axis = pressure_torr", "sweep.values"),
    ("gradient_gauss_per_mm = -1", "gradient"),
])
def test_validation_failures(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text + "\n")


def test_overrides_take_precedence():
    cfg = default_config().with_overrides({"pressure_torr": "30"})
    assert cfg.get("pressure_torr") == 30.0
    with pytest.raises(ConfigError):
        cfg.with_overrides({"bogus": "1"})


def test_unknown_preset_rejected():
    with pytest.raises(ConfigError, match="unknown preset"):
        preset("fig99")


def test_sweep_values_parsing():
    cfg = default_config().with_overrides(
        {"sweep.axis": "pressure_torr", "sweep.values": "3, 10,30"})
    assert sweep_values(cfg) == [3.0, 10.0, 30.0]
    bad = default_config().with_overrides({"sweep.values": "3;10"})
    with pytest.raises(ConfigError):
        sweep_values(bad)


def test_build_physics_unit_conversions():
    cfg = default_config().with_overrides({
        "density_per_cm3": "1e11", "gradient_gauss_per_mm": "2",
        "pump.detuning_mhz": "3", "signal.rabi_khz": "5",
    })
    scheme, env, fields = build_physics(cfg)
    assert env.density == pytest.approx(1e17)
    assert fields.gradient == pytest.approx(2000.0)
    assert fields.pump_detuning == pytest.approx(TWO_PI * 3e6)
    assert fields.signal_rabi == pytest.approx(TWO_PI * 5e3)


def test_explicit_rabi_overrides_power_calibration():
    cfg = default_config().with_overrides({"pump.rabi_mhz": "10"})
    _, _, fields = build_physics(cfg)
    assert fields.pump_rabi == pytest.approx(TWO_PI * 10e6)


# ---------------------------------------------------------------- CLI

def run_cli(*argv):
    return main(list(argv))


def small_chi_args(out, *extra):
    return ("chi", "--out", str(out), "--set", "chi.min_mhz=-5",
            "--set", "chi.max_mhz=5", "--set", "chi.points=5") + extra


def test_chi_command_writes_curve_and_manifest(tmp_path):
    assert run_cli(*small_chi_args(tmp_path)) == 0
    body = (tmp_path / "chi.csv").read_text().splitlines()
    assert body[0] == "detuning_mhz,detuning_rad_s,chi_real,chi_imag"
    assert len(body) == 6
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "chi"
    assert "chi.csv" in manifest["artifacts"]
    assert manifest["config"]["pressure_torr"] == 15.0


def test_config_file_and_set_precedence(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("pressure_torr = 25\nchi.points = 5\n"
                    "chi.min_mhz = -5\nchi.max_mhz = 5\n")
    out = tmp_path / "out"
    assert run_cli("chi", "--config", str(conf), "--set", "pressure_torr=30",
                   "--out", str(out)) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["pressure_torr"] == 30.0
    assert manifest["config"]["chi.points"] == 5


def test_usage_and_input_errors_exit_1(tmp_path):
    assert run_cli(*small_chi_args(tmp_path, "--set", "bogus=1")) == 1
    assert run_cli("chi", "--config", str(tmp_path / "missing.conf"),
                   "--out", str(tmp_path)) == 1
    assert run_cli(*small_chi_args(tmp_path, "--threads", "0")) == 1


def test_physics_failure_exits_2(tmp_path):
    # A far-detuned pump leaves no transparency window near zero detuning.
    assert run_cli("resonance", "--out", str(tmp_path),
                   "--set", "pump.detuning_mhz=500") == 2


def test_sweep_records_failing_points_and_continues(tmp_path):
    assert run_cli("sweep", "--out", str(tmp_path),
                   "--set", "sweep.axis=pressure_torr",
                   "--set", "sweep.values=15,-1",
                   "--set", "sweep.quantity=resonance") == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[1].endswith("ok")
    assert "error: DomainError" in lines[2]


def test_outputs_identical_across_thread_counts(tmp_path):
    args = ("--set", "sweep.axis=pressure_torr", "--set", "sweep.values=5,15,30")
    outs = []
    for threads, name in ((1, "serial"), (3, "parallel")):
        out = tmp_path / name
        assert run_cli(*small_chi_args(out, "--threads", str(threads), *args)) == 0
        outs.append(out)
    names = sorted(p.name for p in outs[0].iterdir() if p.name != "manifest.json")
    assert names == ["chi_pressure_torr_15.csv", "chi_pressure_torr_30.csv",
                     "chi_pressure_torr_5.csv"]
    for name in names:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_plot_flag_renders_png(tmp_path):
    assert run_cli(*small_chi_args(tmp_path, "--plot")) == 0
    assert (tmp_path / "chi.png").stat().st_size > 0


def test_pulse_command_reports_metrics(tmp_path):
    assert run_cli("pulse", "--out", str(tmp_path),
                   "--set", "pulse.optical_density=100") == 0
    metrics = json.loads((tmp_path / "pulse_metrics.json").read_text())
    assert metrics["optical_density"] == 100.0
    assert metrics["delay_s"] == pytest.approx(metrics["closed_form"]["delay_s"],
                                               rel=0.15)
    assert (tmp_path / "pulse_input.csv").exists()
    assert (tmp_path / "pulse_output.csv").exists()
