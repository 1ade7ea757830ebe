# Copyright (c) 2025 Matty Chalk
# Licensed under the MIT License (see LICENSE file for details)

"""Module defining ingestion and analysis of current-sensor logs.

A log is a CSV with the header `t_ms,sensor_V`: one row per millisecond, each holding the Hall
sensor voltage. The sensor reads 0.03 V per ampere.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from bridge_state import BridgeState
from circuit import CurrentTrace
from errors import IngestionError

logger = logging.getLogger(__name__)

SENSOR_VOLTS_PER_AMP = 0.03
LOG_COLUMNS = ["t_ms", "sensor_V"]

# Current (A) below which a logged row counts as the bridge being open.
DEAD_BAND = 1.0


@dataclass(frozen=True)
class MeasuredLog:
    """Sensor voltages (V) at whole-millisecond times."""

    t_ms: tuple[int, ...]
    sensor_v: tuple[float, ...]

    @property
    def current(self) -> np.ndarray:
        """Coil current (A) at each row."""
        return np.asarray(self.sensor_v) / SENSOR_VOLTS_PER_AMP

    @property
    def t(self) -> np.ndarray:
        """Row times (s)."""
        return np.asarray(self.t_ms, dtype=float) * 1e-3


@dataclass(frozen=True)
class PulseRun:
    """Consecutive rows classified as the same bridge state, `start_ms` to `end_ms` inclusive."""

    state: BridgeState
    start_ms: int
    end_ms: int

    @property
    def rows(self) -> int:
        return self.end_ms - self.start_ms + 1


@dataclass(frozen=True)
class LogReport:
    """What a log says about the shot it recorded.

    `resistive_energy` is None when no coil resistance was given; `schedule` is the inferred pulse
    string, or None when the current never left the dead band.
    """

    charge: float
    peak_current: float
    resistive_energy: float | None
    runs: tuple[PulseRun, ...]
    schedule: str | None


def read_log(path: str | Path) -> MeasuredLog:
    """Read and validate a sensor log.

    Parameters
    ----------
    path : str | `Path`
        The CSV file.

    Returns
    -------
    `MeasuredLog`
        The rows of the file.

    Raises
    ------
    `IngestionError`
        On a wrong header, an empty data section, a non-numeric value, a non-integer time, or a time
        that does not follow the previous row by exactly 1 ms. File rows count from 1 at the header.
    """
    logger.info("ingesting sensor log from %s", path)
    try:
        frame = pd.read_csv(path, dtype=str, skipinitialspace=True)
    except pd.errors.EmptyDataError as error:
        raise IngestionError("file is empty, expected the header t_ms,sensor_V", row=1) from error
    except pd.errors.ParserError as error:
        raise IngestionError(f"malformed CSV: {error}") from error
    except OSError as error:
        raise IngestionError(f"cannot read {path}: {error.strerror}") from error

    if list(frame.columns) != LOG_COLUMNS:
        raise IngestionError(
            f"header must be t_ms,sensor_V, got {','.join(map(str, frame.columns))}", row=1
        )
    if frame.empty:
        raise IngestionError("log has no data rows", row=2)

    times = pd.to_numeric(frame["t_ms"], errors="coerce")
    volts = pd.to_numeric(frame["sensor_V"], errors="coerce")
    unreadable = frame.index[times.isna() | volts.isna()]
    if len(unreadable):
        index = unreadable[0]
        raise IngestionError(
            f"expected numbers, got {frame.at[index, 't_ms']!r},{frame.at[index, 'sensor_V']!r}",
            row=index + 2,
        )
    fractional = frame.index[times != times.round()]
    if len(fractional):
        index = fractional[0]
        raise IngestionError(f"t_ms must be a whole number of ms, got {times[index]}", row=index + 2)

    steps = times.diff()
    for index in frame.index[1:]:
        if steps[index] <= 0:
            raise IngestionError(
                f"time goes from {times[index - 1]:g} ms to {times[index]:g} ms, it must increase",
                row=index + 2,
            )
        if steps[index] != 1:
            raise IngestionError(
                f"missing rows between {times[index - 1]:g} ms and {times[index]:g} ms",
                row=index + 2,
            )

    logger.info("read %d rows", len(frame))
    return MeasuredLog(
        t_ms=tuple(int(t) for t in times), sensor_v=tuple(float(v) for v in volts)
    )


def classify(current: float, dead_band: float = DEAD_BAND) -> BridgeState:
    """Return the bridge state a logged current implies."""
    if current > dead_band:
        return BridgeState.FORWARD
    if current < -dead_band:
        return BridgeState.REVERSE
    return BridgeState.BUFFER


def pulse_runs(log: MeasuredLog, dead_band: float = DEAD_BAND) -> tuple[PulseRun, ...]:
    """Split a log into runs of rows with the same implied bridge state."""
    runs: list[PulseRun] = []
    for t_ms, current in zip(log.t_ms, log.current):
        state = classify(float(current), dead_band)
        if runs and runs[-1].state == state:
            runs[-1] = PulseRun(state, runs[-1].start_ms, t_ms)
        else:
            runs.append(PulseRun(state, t_ms, t_ms))
    return tuple(runs)


def infer_schedule(runs: tuple[PulseRun, ...]) -> str | None:
    """Return the pulse string between the first and the last driven run, or None."""
    driven = [index for index, run in enumerate(runs) if run.state != BridgeState.BUFFER]
    if not driven:
        return None
    return " ".join(f"{run.state.value}{run.rows}" for run in runs[driven[0] : driven[-1] + 1])


def analyse_log(
    log: MeasuredLog, resistance: float | None = None, dead_band: float = DEAD_BAND
) -> LogReport:
    """Integrate a log and find its pulse boundaries.

    Parameters
    ----------
    log : `MeasuredLog`
        The log.
    resistance : float, optional
        Coil resistance (ohm) for the resistive energy. Default is None.
    dead_band : float, optional
        Current (A) below which the bridge counts as open. Default is 1 A.

    Returns
    -------
    `LogReport`
        Charge (C), peak current (A), resistive energy (J) and the inferred schedule.
    """
    if resistance is not None and not resistance > 0:
        raise ValueError(f"resistance must be greater than 0, got {resistance}")
    if not dead_band >= 0:
        raise ValueError(f"dead_band must be greater than or equal to 0, got {dead_band}")

    current = log.current
    t = log.t
    energy = None if resistance is None else float(trapezoid(current**2 * resistance, t))
    runs = pulse_runs(log, dead_band)
    report = LogReport(
        charge=float(trapezoid(current, t)),
        peak_current=float(np.max(np.abs(current))),
        resistive_energy=energy,
        runs=runs,
        schedule=infer_schedule(runs),
    )
    logger.info(
        "log: charge %.4f C, peak %.2f A, schedule %s", report.charge, report.peak_current, report.schedule
    )
    return report


def ingest_log(
    path: str | Path, resistance: float | None = None, dead_band: float = DEAD_BAND
) -> tuple[MeasuredLog, LogReport]:
    """Read a sensor log and analyse it."""
    log = read_log(path)
    return log, analyse_log(log, resistance, dead_band)


def trace_to_log(trace: CurrentTrace) -> pd.DataFrame:
    """Return the sensor log a simulated trace would produce.

    Only samples at whole milliseconds are kept, so the trace should be logged at a 1 ms cadence
    (or a divisor of it).
    """
    t_ms = np.array([sample.t for sample in trace.samples]) * 1e3
    whole = np.abs(t_ms - np.round(t_ms)) < 1e-6
    currents = np.array([sample.i_coil for sample in trace.samples])
    return pd.DataFrame(
        {
            "t_ms": np.round(t_ms[whole]).astype(int),
            "sensor_V": currents[whole] * SENSOR_VOLTS_PER_AMP,
        }
    )
