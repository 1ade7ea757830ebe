# Copyright (c) 2025 Matty Chalk
# Licensed under the MIT License (see LICENSE file for details)

"""Module defining the CSV tables and YAML summaries the tool writes.

Data files hold no timestamps, so a given run always produces the same bytes. Summaries carry a
`generated_by` line naming the tool version.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import TextIO

import pandas as pd
import yaml

from circuit import CurrentTrace
from dynamics import KinematicSample, SimResult
from magnetostatics import FieldSample
from objective import Objective
from sweep import SweepPoint, SweepResult
from winding import INDUCTANCE_DEVIATIONS, MEASURED_ELECTRICAL, PRESET_NOTES, preset, profile_to_dict

VERSION = "1.0.0"
GENERATED_BY = f"coilsim {VERSION}"

FIELD_COLUMNS = ["x_mm", "B_T", "dBdx_T_per_m"]
FORCE_COLUMNS = ["x_mm", "F_N"]
TRACE_COLUMNS = ["t_ms", "i_A", "vcap_V", "polarity"]
KINEMATICS_COLUMNS = ["t_ms", "x_mm", "v_mps", "F_N"]
SWEEP_COLUMNS = ["input", "velocity_mps", "efficiency"]


def _round(value: float) -> float:
    return float(f"{value:.12g}")


def field_frame(samples: list[FieldSample]) -> pd.DataFrame:
    """Return an on-axis field profile as a table."""
    return pd.DataFrame(
        [(s.x * 1e3, s.B, s.dBdx) for s in samples], columns=FIELD_COLUMNS
    )


def force_frame(profile: list[tuple[float, float]]) -> pd.DataFrame:
    """Return the (x, F) pairs of a force profile as a table in mm and N."""
    return pd.DataFrame([(x * 1e3, F) for x, F in profile], columns=FORCE_COLUMNS)


def trace_frame(trace: CurrentTrace) -> pd.DataFrame:
    """Return the logged circuit samples as a table."""
    return pd.DataFrame(
        [(s.t * 1e3, s.i_coil, s.v_cap, s.polarity.value) for s in trace.samples],
        columns=TRACE_COLUMNS,
    )


def kinematics_frame(kinematics: tuple[KinematicSample, ...]) -> pd.DataFrame:
    """Return the logged projectile samples as a table."""
    return pd.DataFrame(
        [(s.t * 1e3, s.x * 1e3, s.v, s.F) for s in kinematics], columns=KINEMATICS_COLUMNS
    )


def sweep_frame(result: SweepResult) -> pd.DataFrame:
    """Return the points of a study as a table, one row per launch."""
    return pd.DataFrame(
        [(p.input, p.velocity, p.efficiency) for p in result.points], columns=SWEEP_COLUMNS
    )


def write_csv(frame: pd.DataFrame, target: str | Path | TextIO) -> None:
    """Write a table with a header row and no index."""
    frame.to_csv(target, index=False, lineterminator="\n")


def csv_text(frame: pd.DataFrame) -> str:
    """Return the CSV text `write_csv` would write."""
    buffer = io.StringIO()
    write_csv(frame, buffer)
    return buffer.getvalue()


def simulation_summary(name: str, result: SimResult) -> dict:
    """Return the summary block of one launch."""
    audit = result.audit
    return {
        "generated_by": GENERATED_BY,
        "run": name,
        "exited": result.exited,
        "stalled": result.stalled,
        "exit_velocity_mps": _round(result.exit_velocity),
        "final_velocity_mps": _round(result.final_velocity),
        "efficiency": _round(result.efficiency),
        "v_initial_V": _round(result.v_i),
        "v_final_V": _round(result.v_f),
        "peak_current_A": _round(result.trace.peak_current),
        "energy_J": {
            "capacitor_drop": _round(audit.capacitor_drop),
            "resistive": _round(audit.resistive),
            "diode": _round(audit.diode),
            "stored": _round(audit.stored),
            "delivered": _round(audit.delivered),
            "relative_residual": _round(audit.relative_residual),
        },
    }


def sweep_summary(name: str, result: SweepResult) -> dict:
    """Return the summary block of a study: its size and the best point for each objective."""

    def describe(point: SweepPoint) -> dict:
        return {
            "input": point.input,
            "velocity_mps": _round(point.velocity),
            "efficiency": _round(point.efficiency),
        }

    return {
        "generated_by": GENERATED_BY,
        "run": name,
        "objective": result.objective.value,
        "points": len(result.points),
        "failed": result.failures,
        "best": describe(result.best),
        "best_velocity": describe(result.argmax(Objective.VELOCITY)),
        "best_efficiency": describe(result.argmax(Objective.EFFICIENCY)),
    }


def preset_summary(name: str) -> dict:
    """Return the catalogue entry of a preset: its profile, assumptions and measured values."""
    profile = preset(name)
    measured = MEASURED_ELECTRICAL[profile.name]
    return {
        "name": profile.name,
        "notes": PRESET_NOTES[profile.name],
        "measured": {
            "inductance_uH": _round(measured.inductance * 1e6),
            "resistance_ohm": _round(measured.resistance),
        },
        "estimate_deviation": INDUCTANCE_DEVIATIONS.get(profile.name),
        "profile": profile_to_dict(profile),
    }


def yaml_text(summary: dict) -> str:
    """Return a summary as YAML in insertion order."""
    return yaml.safe_dump(summary, sort_keys=False)
