# Copyright (c) 2025 Matty Chalk
# Licensed under the MIT License (see LICENSE file for details)

"""Testing module for coilgun.py."""

import io
import math

import pandas as pd
import pytest
import yaml
from coilgun import *
from errors import ConfigError
from export import GENERATED_BY
from winding import PRESET_NAMES

SHORT_RUN = """\
name: short
coil:
  preset: single
  electrical:
    inductance_uH: 36
    resistance_ohm: 0.6
tube:
  length_mm: 60
projectile:
  kind: permanent
schedule: "F10"
x0_mm: 5
solver:
  dt_internal_us: 10
"""


def _run(argv: list[str]) -> tuple[int, str]:
    stdout = io.StringIO()
    code = cli(argv, stdout=stdout)
    return code, stdout.getvalue()


def _config(tmp_path, text: str = SHORT_RUN, name: str = "short.cfg") -> str:
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_parse_grid():
    """Unit test parse_grid."""
    assert parse_grid("5,10,15") == (5, 10, 15)
    assert parse_grid("5:20:5") == (5, 10, 15, 20)
    assert parse_grid("7") == (7,)
    for text in ("a", "5:20", "5:20:0", "5,,10"):
        with pytest.raises(ConfigError):
            parse_grid(text)


def test_cli_usage_errors():
    """Unit test cli on usage errors."""
    assert _run([])[0] == 2
    assert _run(["simulate"])[0] == 2
    assert _run(["launch"])[0] == 2
    assert _run(["field", "--preset", "helix"])[0] == 2
    assert _run(["sweep", "x.cfg", "--workers", "0"])[0] == 2
    assert _run(["-v", "-q", "presets"])[0] == 2
    assert _run(["--version"])[0] == 0


def test_cli_presets():
    """Unit test the presets command."""
    code, out = _run(["presets"])
    assert code == 0
    catalogue = yaml.safe_load(out)
    assert catalogue["generated_by"] == GENERATED_BY
    assert [entry["name"] for entry in catalogue["presets"]] == list(PRESET_NAMES)


def test_cli_presets_write_dir(tmp_path):
    """Unit test the presets command writing one file per preset."""
    code, out = _run(["presets", "--write-dir", str(tmp_path / "catalogue")])
    assert code == 0
    assert out == ""
    written = sorted(path.stem for path in (tmp_path / "catalogue").glob("*.yaml"))
    assert written == sorted(PRESET_NAMES)


def test_cli_field_long_solenoid(tmp_path):
    """Unit test the field command against the long-solenoid field in the middle of the coil."""
    code, out = _run(["field", "--preset", "single", "--current", "1", "--grid-mm", "0.5"])
    assert code == 0
    frame = pd.read_csv(io.StringIO(out))
    assert list(frame.columns) == ["x_mm", "B_T", "dBdx_T_per_m"]
    assert frame["x_mm"].iloc[0] == pytest.approx(-20.0)
    assert frame["x_mm"].iloc[-1] == pytest.approx(375.5)
    inside = frame[(frame["x_mm"] >= 50) & (frame["x_mm"] <= 300)]
    expected = 4e-7 * math.pi * 523 / 0.3556
    assert len(inside) > 400
    assert inside["B_T"].min() > 0.99 * expected
    assert inside["B_T"].max() < 1.01 * expected


def test_cli_field_force(tmp_path):
    """Unit test the field command writing the force on a projectile."""
    force = tmp_path / "force.csv"
    code, _ = _run(
        [
            "field",
            "--config",
            _config(tmp_path),
            "--current",
            "50",
            "--grid-mm",
            "2",
            "--out",
            str(tmp_path / "field.csv"),
            "--force-out",
            str(force),
        ]
    )
    assert code == 0
    frame = pd.read_csv(force)
    assert list(frame.columns) == ["x_mm", "F_N"]
    assert len(frame) == len(pd.read_csv(tmp_path / "field.csv"))
    # A Forward current pulls the magnet in from behind the coil.
    assert frame[frame["x_mm"] < 0]["F_N"].max() > 0


def test_cli_field_time_needs_config():
    """Unit test the field command rejecting --time-ms without a run file."""
    assert _run(["field", "--preset", "single", "--time-ms", "5"])[0] == 3


def test_cli_field_at_time(tmp_path):
    """Unit test the field command at a time after the pulse has ended."""
    code, out = _run(["field", "--config", _config(tmp_path), "--time-ms", "50", "--grid-mm", "5"])
    assert code == 0
    assert (pd.read_csv(io.StringIO(out))["B_T"] == 0).all()


def test_cli_simulate(tmp_path):
    """Unit test the simulate command."""
    trace, kinematics = tmp_path / "trace.csv", tmp_path / "kinematics.csv"
    code, out = _run(
        ["simulate", _config(tmp_path), "--trace", str(trace), "--kinematics", str(kinematics)]
    )
    assert code == 0
    summary = yaml.safe_load(out)
    assert summary["generated_by"] == GENERATED_BY
    assert summary["run"] == "short"
    assert summary["exited"] != summary["stalled"]
    assert summary["v_initial_V"] == 45.0
    assert summary["energy_J"]["relative_residual"] < 5e-3
    assert trace.read_text().startswith("t_ms,i_A,vcap_V,polarity\n")
    assert kinematics.read_text().startswith("t_ms,x_mm,v_mps,F_N\n")


def test_cli_simulate_deterministic(tmp_path):
    """Unit test the simulate command writing the same bytes twice."""
    config = _config(tmp_path)
    outputs = []
    for run in ("a", "b"):
        summary = tmp_path / f"{run}.yaml"
        trace = tmp_path / f"{run}.csv"
        assert _run(["simulate", config, "--trace", str(trace), "--summary", str(summary)]) == (0, "")
        outputs.append((trace.read_bytes(), summary.read_bytes()))
    assert outputs[0] == outputs[1]


def test_cli_simulate_overrides(tmp_path):
    """Unit test the simulate command with --pulse and --x0-mm replacing the run file's values."""
    kinematics, trace = tmp_path / "kinematics.csv", tmp_path / "trace.csv"
    code, out = _run(
        [
            "simulate",
            _config(tmp_path),
            "--pulse",
            "F5 B2 R3",
            "--x0-mm",
            "8",
            "--kinematics",
            str(kinematics),
            "--trace",
            str(trace),
        ]
    )
    assert code == 0
    assert pd.read_csv(kinematics)["x_mm"].iloc[0] == pytest.approx(-8.0)
    assert "R" in set(pd.read_csv(trace)["polarity"])

    edited = SHORT_RUN.replace('"F10"', '"F5 B2 R3"').replace("x0_mm: 5", "x0_mm: 8")
    assert _run(["simulate", _config(tmp_path, edited, "edited.cfg")]) == (0, out)

    assert _run(["simulate", _config(tmp_path), "--pulse", "F5B2"])[0] == 5
    assert _run(["simulate", _config(tmp_path), "--x0-mm", "-100"])[0] == 3


def test_cli_field_default_grid():
    """Unit test the field command sampling every 0.1 mm by default."""
    args = build_parser().parse_args(["field", "--preset", "single"])
    assert args.grid_mm == pytest.approx(0.1)
    code, out = _run(["field", "--preset", "single", "--from-mm", "0", "--to-mm", "1"])
    assert code == 0
    assert list(pd.read_csv(io.StringIO(out))["x_mm"]) == pytest.approx([0.1 * k for k in range(11)])


def test_cli_error_exit_codes(tmp_path):
    """Unit test the exit status of each kind of failure."""
    assert _run(["simulate", str(tmp_path / "absent.cfg")])[0] == 3
    assert _run(["simulate", _config(tmp_path, SHORT_RUN + "colour: red\n", "colour.cfg")])[0] == 3
    bad_schedule = SHORT_RUN.replace('"F10"', '"F10 Q3"')
    assert _run(["simulate", _config(tmp_path, bad_schedule, "schedule.cfg")])[0] == 5
    too_long = SHORT_RUN.replace(
        "  preset: single\n",
        "  profile:\n    name: long\n    sections:\n    - length_mm: 100\n      layers: 1\n",
    )
    assert _run(["simulate", _config(tmp_path, too_long, "long.cfg")])[0] == 4
    unknown = SHORT_RUN.replace("preset: single", "preset: helix")
    assert _run(["simulate", _config(tmp_path, unknown, "helix.cfg")])[0] == 10


def test_cli_ingest(tmp_path):
    """Unit test the ingest command."""
    log = tmp_path / "log.csv"
    log.write_text("t_ms,sensor_V\n0,0.0\n1,1.5\n2,1.5\n3,0.0\n4,-1.5\n5,0.0\n")
    code, out = _run(["ingest", str(log), "--resistance", "0.6"])
    assert code == 0
    report = yaml.safe_load(out)
    assert report["rows"] == 6
    assert report["schedule"] == "F2 B1 R1"
    assert report["peak_current_A"] == pytest.approx(50.0)
    assert report["charge_C"] == pytest.approx(0.05)
    assert report["resistive_energy_J"] == pytest.approx(0.6 * 2500 * 3e-3)

    log.write_text("t_ms,sensor_V\n0,0.0\n2,1.5\n")
    assert _run(["ingest", str(log)])[0] == 9


def test_cli_sweep(tmp_path):
    """Unit test the sweep command."""
    summary = tmp_path / "summary.yaml"
    code, out = _run(
        ["sweep", _config(tmp_path), "--range-mm", "4", "6", "2", "--summary", str(summary)]
    )
    assert code == 0
    frame = pd.read_csv(io.StringIO(out))
    assert list(frame.columns) == ["input", "velocity_mps", "efficiency"]
    assert list(frame["input"]) == [4.0, 6.0]
    assert yaml.safe_load(summary.read_text())["points"] == 2
    assert _run(["sweep", _config(tmp_path)])[0] == 3


def test_cli_optimize(tmp_path):
    """Unit test the optimize command."""
    code, out = _run(["optimize", _config(tmp_path), "--template", "F?", "--grid", "5,10"])
    assert code == 0
    frame = pd.read_csv(io.StringIO(out))
    assert list(frame["input"]) == ["F5", "F10"]

    assert _run(["optimize", _config(tmp_path), "--template", "F?"])[0] == 3
    assert _run(["optimize", _config(tmp_path)])[0] == 3
    assert _run(["optimize", _config(tmp_path), "--template", "F?", "--grid", "5,10", "--budget", "1"])[0] == 7
    assert _run(["optimize", _config(tmp_path), "--template", "F? Z?", "--grid", "5", "--grid", "5"])[0] == 5
