# Copyright (c) 2025 Matty Chalk
# Licensed under the MIT License (see LICENSE file for details)

"""Module defining the capacitor-discharge circuit driven through the H-bridge.

Forward and Reverse connect the capacitor across the coil with polarity +1 or -1:

    L dI/dt = polarity * v - R I,    C dv/dt = -polarity * I

Buffer opens the bridge. Any coil current then flows through the flyback diodes back into the
capacitor until it reaches zero, after which the coil is open:

    L dI/dt = -(v + V_diode) sign(I) - R I,    C dv/dt = |I|

R is the coil resistance plus the capacitor's series resistance. The resistive and diode losses are
carried as two extra integrated states so every run can be audited for energy balance.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from bridge_state import BridgeState
from errors import AuditError, ConfigError, DomainError
from pulse import PulseSchedule
from winding import CoilElectrical

logger = logging.getLogger(__name__)

MAX_DT_INTERNAL = 10e-6

# Sample times closer than this (s) to a step end reuse the step's state.
_TIME_TOLERANCE = 1e-12

# Flyback current (A) below which the diodes are taken to stop conducting.
CURRENT_FLOOR = 1e-9


@dataclass(frozen=True)
class Capacitor:
    """Storage capacitor.

    Parameters
    ----------
    capacitance : float
        Capacitance (F).
    v : float
        Initial voltage (V).
    esr : float, optional
        Series resistance (ohm). Default is 0.
    """

    capacitance: float
    v: float
    esr: float = 0.0

    def __post_init__(self) -> None:
        if not self.capacitance > 0:
            raise ValueError(f"capacitance must be greater than 0, got {self.capacitance}")
        if not math.isfinite(self.v):
            raise ValueError(f"v must be finite, got {self.v}")
        if not self.esr >= 0:
            raise ValueError(f"esr must be greater than or equal to 0, got {self.esr}")

    @property
    def energy(self) -> float:
        """Stored energy at the initial voltage (J)."""
        return 0.5 * self.capacitance * self.v**2


@dataclass(frozen=True)
class CircuitState:
    """Circuit quantities at time `t` (s), with the losses accumulated so far (J)."""

    t: float
    v_cap: float
    i_coil: float
    polarity: BridgeState
    e_resistive: float = 0.0
    e_diode: float = 0.0


@dataclass(frozen=True)
class TraceSample:
    """One logged point of a `CurrentTrace`."""

    t: float
    i_coil: float
    v_cap: float
    polarity: BridgeState


@dataclass(frozen=True)
class CurrentTrace:
    """Logged circuit samples of one run plus the end-of-run quantities for the energy audit.

    `e_resistive` and `e_diode` are the losses integrated alongside the circuit (J).
    """

    samples: tuple[TraceSample, ...]
    capacitance: float
    inductance: float
    resistance: float
    diode_drop: float
    v_initial: float
    v_final: float
    i_final: float
    e_resistive: float
    e_diode: float

    @property
    def duration(self) -> float:
        """Time of the last sample (s)."""
        return self.samples[-1].t

    @property
    def peak_current(self) -> float:
        """Largest logged current magnitude (A)."""
        return max(abs(sample.i_coil) for sample in self.samples)


def _series_resistance(coil: CoilElectrical, cap: Capacitor) -> float:
    return coil.resistance + cap.esr


def derivatives(
    v: float,
    i: float,
    drive: int,
    flyback: int,
    inductance: float,
    resistance: float,
    capacitance: float,
    diode_drop: float = 0.0,
) -> tuple[float, float, float, float]:
    """Return the time derivatives of (v_cap, i_coil, e_resistive, e_diode).

    Parameters
    ----------
    v, i : float
        Capacitor voltage (V) and coil current (A).
    drive : int
        Bridge polarity: +1, -1, or 0 when open.
    flyback : int
        Sign of the current the flyback diodes conduct while the bridge is open; 0 when the coil is open.
    inductance, resistance, capacitance : float
        Circuit constants (H, ohm, F).
    diode_drop : float, optional
        Forward drop of the flyback diodes (V). Default is 0.

    Returns
    -------
    tuple[float, float, float, float]
        dv/dt, dI/dt, dE_resistive/dt, dE_diode/dt.
    """
    if drive != 0:
        return (
            -drive * i / capacitance,
            (drive * v - resistance * i) / inductance,
            resistance * i * i,
            0.0,
        )
    if flyback != 0:
        return (
            flyback * i / capacitance,
            (-(v + diode_drop) * flyback - resistance * i) / inductance,
            resistance * i * i,
            diode_drop * flyback * i,
        )
    return 0.0, 0.0, 0.0, 0.0


def rk4_step(
    y: tuple[float, ...], h: float, rate: Callable[[tuple[float, ...]], tuple[float, ...]]
) -> tuple[float, ...]:
    """Advance the state tuple `y` by `h` with one classical Runge-Kutta step of `rate(y)`."""
    k1 = rate(y)
    k2 = rate(tuple(a + 0.5 * h * b for a, b in zip(y, k1)))
    k3 = rate(tuple(a + 0.5 * h * b for a, b in zip(y, k2)))
    k4 = rate(tuple(a + h * b for a, b in zip(y, k3)))
    return tuple(
        a + h / 6 * (b1 + 2 * b2 + 2 * b3 + b4) for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)
    )


def flyback_sign(polarity: BridgeState, i: float) -> int:
    """Return the sign of the current conducted by the flyback diodes, 0 if none flows."""
    if int(polarity) != 0 or i == 0:
        return 0
    return 1 if i > 0 else -1


def crossing_fraction(i_before: float, i_after: float, sign: int) -> float | None:
    """Return the fraction of a flyback step after which the diodes stop conducting.

    Parameters
    ----------
    i_before, i_after : float
        Coil current at the start and end of the step (A).
    sign : int
        Flyback sign of the step, see `flyback_sign`.

    Returns
    -------
    float or None
        None while the current keeps its sign, otherwise the linear estimate of the zero crossing in (0, 1].
    """
    if sign == 0 or sign * i_after > CURRENT_FLOOR:
        return None
    if sign * i_after > 0:
        return 1.0
    return i_before / (i_before - i_after)


def flyback_step(
    y: tuple[float, ...], h: float, rate: Callable[[tuple[float, ...]], tuple[float, ...]], sign: int
) -> tuple[tuple[float, ...], float | None]:
    """Take one RK4 step of a state starting (v, i, ...) and stop the current at a zero crossing.

    On a crossing the step is re-integrated up to the crossing and the current set to exactly 0.

    Returns
    -------
    tuple[tuple[float, ...], float or None]
        The new state and the crossing fraction, None when there was none.
    """
    after = rk4_step(y, h, rate)
    fraction = crossing_fraction(y[1], after[1], sign)
    if fraction is None:
        return after, None
    if fraction < 1.0:
        # One secant refinement of the crossing time.
        partial = rk4_step(y, fraction * h, rate)
        if sign * partial[1] > 0:
            fraction += (1.0 - fraction) * partial[1] / (partial[1] - after[1])
        elif partial[1] != 0:
            fraction *= y[1] / (y[1] - partial[1])
        after = rk4_step(y, fraction * h, rate)
    return (after[0], 0.0) + tuple(after[2:]), fraction


def step(
    state: CircuitState,
    coil: CoilElectrical,
    cap: Capacitor,
    polarity: BridgeState,
    dt: float,
    diode_drop: float = 0.0,
) -> CircuitState:
    """Advance the circuit by one RK4 step.

    Parameters
    ----------
    state : `CircuitState`
        State at the start of the step.
    coil : `CoilElectrical`
        The coil.
    cap : `Capacitor`
        The capacitor. Its capacitance and series resistance are used; the voltage comes from `state`.
    polarity : `BridgeState`
        Bridge state held for the whole step.
    dt : float
        Step length (s).
    diode_drop : float, optional
        Forward drop of the flyback diodes (V). Default is 0.

    Returns
    -------
    `CircuitState`
        State at `state.t + dt`.
    """
    if dt <= 0:
        raise ValueError(f"dt must be greater than 0, got {dt}")
    drive = int(polarity)
    flyback = flyback_sign(polarity, state.i_coil)
    resistance = _series_resistance(coil, cap)

    def rate(y: tuple[float, ...]) -> tuple[float, ...]:
        return derivatives(
            y[0], y[1], drive, flyback, coil.inductance, resistance, cap.capacitance, diode_drop
        )

    before = (state.v_cap, state.i_coil, state.e_resistive, state.e_diode)
    after, _ = flyback_step(before, dt, rate, flyback)
    v, i, e_r, e_d = after
    return CircuitState(
        t=state.t + dt, v_cap=v, i_coil=i, polarity=polarity, e_resistive=e_r, e_diode=e_d
    )


def check_solver_settings(dt_internal: float, log_cadence: float) -> None:
    """Raise `ConfigError` unless 0 < dt_internal <= 10 us and log_cadence > 0."""
    if not dt_internal > 0:
        raise ConfigError(f"dt_internal must be greater than 0, got {dt_internal}")
    if dt_internal > MAX_DT_INTERNAL:
        raise ConfigError(
            f"dt_internal must be at most {MAX_DT_INTERNAL * 1e6:g} us, got {dt_internal * 1e6:g} us"
        )
    if not log_cadence > 0:
        raise ConfigError(f"log_cadence must be greater than 0, got {log_cadence}")


def segment_steps(duration: float, dt_internal: float) -> tuple[int, float]:
    """Return the number of equal steps covering `duration` no longer than `dt_internal`, and their length."""
    count = max(1, math.ceil(duration / dt_internal - 1e-6))
    return count, duration / count


def run_circuit(
    coil: CoilElectrical,
    cap: Capacitor,
    schedule: PulseSchedule,
    dt_internal: float = 5e-6,
    log_cadence: float = 1e-3,
    diode_drop: float = 0.0,
) -> CurrentTrace:
    """Integrate the circuit through a schedule, then through Buffer until the coil current is zero.

    Parameters
    ----------
    coil : `CoilElectrical`
        The coil.
    cap : `Capacitor`
        The capacitor, charged to `cap.v`.
    schedule : `PulseSchedule`
        The bridge schedule.
    dt_internal : float, optional
        Largest integration step (s), at most 10 us. Default is 5 us.
    log_cadence : float, optional
        Spacing of the logged samples (s). Default is 1 ms.
    diode_drop : float, optional
        Forward drop of the flyback diodes (V). Default is 0.

    Returns
    -------
    `CurrentTrace`
        Samples at every multiple of `log_cadence` plus the final state.
    """
    check_solver_settings(dt_internal, log_cadence)
    if diode_drop < 0:
        raise ConfigError(f"diode_drop must be greater than or equal to 0, got {diode_drop}")

    state = CircuitState(t=0.0, v_cap=cap.v, i_coil=0.0, polarity=schedule.segments[0].state)
    samples = [TraceSample(0.0, 0.0, cap.v, state.polarity)]
    next_log = 1

    def advance(state: CircuitState, polarity: BridgeState, h: float) -> CircuitState:
        nonlocal next_log
        after = step(state, coil, cap, polarity, h, diode_drop)
        while next_log * log_cadence <= after.t + _TIME_TOLERANCE:
            t_log = next_log * log_cadence
            if after.t - t_log <= _TIME_TOLERANCE:
                logged = after
            else:
                logged = step(state, coil, cap, polarity, t_log - state.t, diode_drop)
            samples.append(TraceSample(t_log, logged.i_coil, logged.v_cap, polarity))
            next_log += 1
        return after

    start = 0.0
    for segment in schedule.segments:
        duration = segment.duration_ms * 1e-3
        count, h = segment_steps(duration, dt_internal)
        for index in range(count):
            state = advance(state, segment.state, h)
            # Re-anchor on the segment grid so boundaries land on whole milliseconds.
            state = CircuitState(
                t=start + (index + 1) * h,
                v_cap=state.v_cap,
                i_coil=state.i_coil,
                polarity=state.polarity,
                e_resistive=state.e_resistive,
                e_diode=state.e_diode,
            )
        start += duration
        logger.debug(
            "segment %s done at %.3f ms: I = %.3f A, v = %.3f V",
            segment,
            state.t * 1e3,
            state.i_coil,
            state.v_cap,
        )

    while state.i_coil != 0:
        state = advance(state, BridgeState.BUFFER, dt_internal)

    if state.t > samples[-1].t + _TIME_TOLERANCE:
        samples.append(TraceSample(state.t, state.i_coil, state.v_cap, state.polarity))

    resistance = _series_resistance(coil, cap)
    return CurrentTrace(
        samples=tuple(samples),
        capacitance=cap.capacitance,
        inductance=coil.inductance,
        resistance=resistance,
        diode_drop=diode_drop,
        v_initial=cap.v,
        v_final=state.v_cap,
        i_final=state.i_coil,
        e_resistive=state.e_resistive,
        e_diode=state.e_diode,
    )


def overdamped_roots(resistance: float, inductance: float, capacitance: float) -> tuple[float, float]:
    """Return the roots (s1, s2) of L s^2 + R s + 1/C = 0, s1 being the slower one.

    Raises `DomainError` unless the circuit is overdamped, R > 2 sqrt(L/C).
    """
    alpha = resistance / (2 * inductance)
    omega_squared = 1 / (inductance * capacitance)
    if alpha**2 <= omega_squared:
        raise DomainError(
            f"circuit is not overdamped: R = {resistance} ohm, 2 sqrt(L/C) = "
            f"{2 * math.sqrt(inductance / capacitance)} ohm"
        )
    s2 = -alpha - math.sqrt(alpha**2 - omega_squared)
    return omega_squared / s2, s2


def overdamped_amplitude(v0: float, resistance: float, inductance: float, capacitance: float) -> float:
    """Return V0 / (L (s1 - s2)), the amplitude of the two exponentials in the discharge current (A)."""
    s1, s2 = overdamped_roots(resistance, inductance, capacitance)
    return v0 / (inductance * (s1 - s2))


def overdamped_current(
    t: float | np.ndarray, v0: float, resistance: float, inductance: float, capacitance: float
) -> float | np.ndarray:
    """Return the current of an overdamped series RLC discharge from rest at time `t` (A).

    Parameters
    ----------
    t : float or numpy.ndarray
        Time since the capacitor was connected (s).
    v0 : float
        Initial capacitor voltage (V).
    resistance, inductance, capacitance : float
        Circuit constants (ohm, H, F).

    Returns
    -------
    float or numpy.ndarray
        A (exp(s1 t) - exp(s2 t)).
    """
    s1, s2 = overdamped_roots(resistance, inductance, capacitance)
    amplitude = v0 / (inductance * (s1 - s2))
    return amplitude * (np.exp(s1 * t) - np.exp(s2 * t))


def overdamped_peak(
    v0: float, resistance: float, inductance: float, capacitance: float
) -> tuple[float, float]:
    """Return the time (s) and value (A) of the largest overdamped discharge current."""
    s1, s2 = overdamped_roots(resistance, inductance, capacitance)
    t_peak = math.log(s2 / s1) / (s1 - s2)
    return t_peak, float(overdamped_current(t_peak, v0, resistance, inductance, capacitance))


@dataclass(frozen=True)
class EnergyAudit:
    """Energy balance of one run (J).

    `capacitor_drop` must equal the sum of the other terms.
    """

    capacitor_drop: float
    resistive: float
    diode: float
    stored: float
    delivered: float = 0.0

    @property
    def residual(self) -> float:
        """Capacitor energy not accounted for by losses, stored energy and work done."""
        return self.capacitor_drop - (self.resistive + self.diode + self.stored + self.delivered)

    @property
    def relative_residual(self) -> float:
        """`residual` as a fraction of `capacitor_drop`; 0 when nothing was drawn."""
        if self.capacitor_drop == 0:
            return abs(self.residual)
        return abs(self.residual / self.capacitor_drop)

    def check(self, tolerance: float = 5e-3) -> None:
        """Raise `AuditError` if the balance does not close within `tolerance`."""
        if self.relative_residual > tolerance:
            raise AuditError(
                f"energy balance off by {self.relative_residual:.3%}: drawn {self.capacitor_drop:.6g} J, "
                f"resistive {self.resistive:.6g} J, diode {self.diode:.6g} J, "
                f"stored {self.stored:.6g} J, delivered {self.delivered:.6g} J"
            )


def audit_energy(trace: CurrentTrace, delivered: float = 0.0, method: str = "integrated") -> EnergyAudit:
    """Return the energy balance of a trace.

    Parameters
    ----------
    trace : `CurrentTrace`
        The run.
    delivered : float, optional
        Mechanical work done on the projectile (J). Default is 0.
    method : str, optional
        "integrated" uses the losses integrated with the circuit; "samples" integrates I^2 R and the
        diode loss over the logged samples with the trapezoid rule. Default is "integrated".

    Returns
    -------
    `EnergyAudit`
        The balance.
    """
    match method:
        case "integrated":
            resistive, diode = trace.e_resistive, trace.e_diode
        case "samples":
            t = np.array([sample.t for sample in trace.samples])
            i = np.array([sample.i_coil for sample in trace.samples])
            conducting = np.array(
                [int(sample.polarity) == 0 for sample in trace.samples], dtype=float
            )
            resistive = float(trapezoid(trace.resistance * i**2, t))
            diode = float(trapezoid(trace.diode_drop * np.abs(i) * conducting, t))
        case _:
            raise ValueError(f"method must be 'integrated' or 'samples', got '{method}'")

    return EnergyAudit(
        capacitor_drop=0.5 * trace.capacitance * (trace.v_initial**2 - trace.v_final**2),
        resistive=resistive,
        diode=diode,
        stored=0.5 * trace.inductance * trace.i_final**2,
        delivered=delivered,
    )
