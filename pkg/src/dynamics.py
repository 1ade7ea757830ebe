# Copyright (c) 2025 Matty Chalk
# Licensed under the MIT License (see LICENSE file for details)

"""Module defining projectile magnetization, the axial dipole force, and the launch simulation.

A launch integrates the circuit and the projectile together on one fixed RK4 time base. The
projectile is a point dipole at its centre and the field is the quasi-static field of the coil scaled
by the instantaneous current. Motion does not feed back into the circuit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from bridge_state import BridgeState
from circuit import (
    Capacitor,
    CurrentTrace,
    EnergyAudit,
    TraceSample,
    audit_energy,
    check_solver_settings,
    derivatives,
    flyback_sign,
    flyback_step,
    rk4_step,
    segment_steps,
)
from errors import AuditError, ConfigError
from magnetostatics import MU_0, FieldSample, FieldTable
from pulse import PulseSchedule, format_schedule
from winding import DEFAULT_TUBE, CoilElectrical, LoopStack, TubeSpec

logger = logging.getLogger(__name__)

NDFEB_DENSITY = 7500.0
N52_REMANENCE = 1.45
N52_MASS = 6.06e-3
FERRITE_MASS = 3.73e-3

# Moment of a 6.06 g N52 magnet, taking its volume from the bulk density of NdFeB.
DEFAULT_MAGNET_MOMENT = N52_REMANENCE * (N52_MASS / NDFEB_DENSITY) / MU_0

# Ferrite rod constants chosen so that the rod saturates inside a coil carrying tens of amps.
DEFAULT_FERRITE_COUPLING = 3.0
DEFAULT_FERRITE_SATURATION = 0.35

# Margin (m) the launch field table extends beyond the start position and the exit.
FIELD_MARGIN = 0.02

_TIME_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PermanentDipole:
    """Fixed magnetic moment (A m^2). Orientation +1 is pulled inward by Forward current."""

    moment: float
    orientation: int = 1

    def __post_init__(self) -> None:
        if not self.moment >= 0:
            raise ValueError(f"moment must be greater than or equal to 0, got {self.moment}")
        if self.orientation not in (1, -1):
            raise ValueError(f"orientation must be 1 or -1, got {self.orientation}")


@dataclass(frozen=True)
class InducedDipole:
    """Moment proportional to the applied field (A m^2/T) up to a saturation moment (A m^2)."""

    coupling: float
    saturation_moment: float

    def __post_init__(self) -> None:
        if not self.coupling >= 0:
            raise ValueError(f"coupling must be greater than or equal to 0, got {self.coupling}")
        if not self.saturation_moment >= 0:
            raise ValueError(
                f"saturation_moment must be greater than or equal to 0, got {self.saturation_moment}"
            )


@dataclass(frozen=True)
class Projectile:
    """A projectile of `mass` (kg) magnetized according to `model`.

    The launch ends when its centre passes the tube end plus `half_length` (m).
    """

    mass: float
    model: PermanentDipole | InducedDipole
    half_length: float = 0.0

    def __post_init__(self) -> None:
        if not self.mass > 0:
            raise ValueError(f"mass must be greater than 0, got {self.mass}")
        if not isinstance(self.model, (PermanentDipole, InducedDipole)):
            raise TypeError(
                f"model must be PermanentDipole or InducedDipole, got {type(self.model).__name__}"
            )
        if not self.half_length >= 0:
            raise ValueError(f"half_length must be greater than or equal to 0, got {self.half_length}")


def n52_magnet() -> Projectile:
    """Return the 6.06 g N52 magnet projectile."""
    return Projectile(mass=N52_MASS, model=PermanentDipole(moment=DEFAULT_MAGNET_MOMENT))


def ferrite_rod() -> Projectile:
    """Return the 3.73 g ferrite rod projectile."""
    return Projectile(
        mass=FERRITE_MASS,
        model=InducedDipole(
            coupling=DEFAULT_FERRITE_COUPLING, saturation_moment=DEFAULT_FERRITE_SATURATION
        ),
    )


@dataclass(frozen=True)
class KinematicSample:
    """Projectile position (m), velocity (m/s) and axial force (N) at time `t` (s)."""

    t: float
    x: float
    v: float
    F: float


@dataclass(frozen=True)
class SolverSettings:
    """Integration settings of a launch.

    Parameters
    ----------
    dt_internal : float, optional
        Largest RK4 step (s), at most 10 us. Default is 5 us.
    log_cadence : float, optional
        Spacing of the logged samples (s). Default is 1 ms.
    diode_drop : float, optional
        Forward drop of the flyback diodes (V). Default is 0.
    friction : float, optional
        Constant force opposing the projectile's motion (N). Default is 0.
    field_step : float, optional
        Grid spacing of the field lookup table (m); 0 evaluates the loops on every call. Default is 0.05 mm.
    """

    dt_internal: float = 5e-6
    log_cadence: float = 1e-3
    diode_drop: float = 0.0
    friction: float = 0.0
    field_step: float = 5e-5

    def __post_init__(self) -> None:
        check_solver_settings(self.dt_internal, self.log_cadence)
        for name in ("diode_drop", "friction", "field_step"):
            value = getattr(self, name)
            if not value >= 0:
                raise ConfigError(f"{name} must be greater than or equal to 0, got {value}")


@dataclass(frozen=True)
class SimResult:
    """Outcome of one launch.

    `exit_velocity` is 0 for a projectile that never left the tube; `final_velocity` keeps the signed
    velocity at the end of the run in every case. `v_f` is the capacitor voltage when the run ended.
    """

    exit_velocity: float
    final_velocity: float
    v_i: float
    v_f: float
    efficiency: float
    trace: CurrentTrace
    kinematics: tuple[KinematicSample, ...]
    stalled: bool
    exited: bool
    audit: EnergyAudit = field(compare=False)


def dipole_moment(p: Projectile, B: float) -> float:
    """Return the signed axial moment of a projectile in the field `B`.

    Parameters
    ----------
    p : `Projectile`
        The projectile.
    B : float
        Axial field at the projectile's centre (T).

    Returns
    -------
    float
        The fixed moment times its orientation for a permanent dipole, or
        coupling * B clamped to +/- saturation_moment for an induced one (A m^2).
    """
    model = p.model
    if isinstance(model, PermanentDipole):
        return model.orientation * model.moment
    moment = model.coupling * B
    return max(-model.saturation_moment, min(model.saturation_moment, moment))


def force(p: Projectile, sample: FieldSample) -> float:
    """Return the axial force m dB/dx on a projectile (N)."""
    return dipole_moment(p, sample.B) * sample.dBdx


def force_profile(
    p: Projectile, stack: LoopStack, I: float, xs: list[float], field_table: FieldTable | None = None
) -> list[tuple[float, float]]:
    """Return (x, F) along the axis for a steady coil current `I`.

    The field comes from `field_table` when given, otherwise from exact superposition.
    """
    table = field_table if field_table is not None else FieldTable.build(stack, 0.0, 0.0, step=0.0)
    return [(x, force(p, table.sample(I, x))) for x in xs]


def efficiency(mass: float, v: float, C: float, v_i: float, v_f: float) -> float:
    """Return the fraction of the capacitor's energy drop turned into kinetic energy.

    Parameters
    ----------
    mass : float
        Projectile mass (kg).
    v : float
        Exit velocity (m/s).
    C : float
        Capacitance (F).
    v_i, v_f : float
        Capacitor voltage before and after the launch (V).

    Returns
    -------
    float
        (1/2 mass v^2) / (1/2 C (v_i^2 - v_f^2)); 0 when v is 0.
    """
    if v == 0:
        return 0.0
    drop = 0.5 * C * (v_i**2 - v_f**2)
    if not drop > 0:
        raise AuditError(
            f"projectile gained {0.5 * mass * v**2:.6g} J while the capacitor went from {v_i} V to {v_f} V"
        )
    return 0.5 * mass * v**2 / drop


def launch(
    stack: LoopStack,
    coil: CoilElectrical,
    cap: Capacitor,
    schedule: PulseSchedule,
    projectile: Projectile,
    x0: float,
    tube: TubeSpec = DEFAULT_TUBE,
    solver: SolverSettings | None = None,
    field_table: FieldTable | None = None,
) -> SimResult:
    """Fire one shot and follow the projectile until it leaves the tube or the drive is spent.

    The coil's near edge is the tube entrance at x = 0; the projectile's centre starts at rest at
    x = -x0. The run ends when the centre passes `tube.length + projectile.half_length`, or once the
    schedule is over and the flyback current has died out. A projectile still inside then coasts
    (against friction, if any) and either exits or stalls.

    Parameters
    ----------
    stack : `LoopStack`
        The coil's loops, giving the field. Must not be empty.
    coil : `CoilElectrical`
        The coil's lumped inductance and resistance, driving the circuit.
    cap : `Capacitor`
        The capacitor, charged to `cap.v`.
    schedule : `PulseSchedule`
        The bridge schedule.
    projectile : `Projectile`
        The projectile.
    x0 : float
        Distance from the projectile's centre to the coil's near edge, positive outside the coil (m).
    tube : `TubeSpec`, optional
        The tube. Default is `DEFAULT_TUBE`.
    solver : `SolverSettings`, optional
        Integration settings. Default is `SolverSettings()`.
    field_table : `FieldTable`, optional
        Precomputed field of `stack`. Built for the launch when omitted.

    Returns
    -------
    `SimResult`
        The outcome, including the circuit trace and the kinematics at the logging cadence.
    """
    solver = solver if solver is not None else SolverSettings()
    if len(stack) == 0:
        raise ValueError("stack must contain at least one loop")
    x_start = -x0
    x_exit = tube.length + projectile.half_length
    if not math.isfinite(x0) or x_start >= x_exit:
        raise ConfigError(f"x0 must place the projectile before the tube exit, got {x0 * 1e3:g} mm")
    if field_table is None:
        field_table = FieldTable.build(
            stack, x_start - FIELD_MARGIN, x_exit + FIELD_MARGIN, solver.field_step
        )

    inductance = coil.inductance
    resistance = coil.resistance + cap.esr
    capacitance = cap.capacitance
    mass = projectile.mass
    friction = solver.friction
    diode_drop = solver.diode_drop

    def push(i: float, x: float) -> float:
        if i == 0:
            return 0.0
        return force(projectile, field_table.sample(i, x))

    def acceleration(i: float, x: float, u: float) -> float:
        F = push(i, x)
        if friction == 0:
            return F / mass
        if u != 0:
            return (F - math.copysign(friction, u)) / mass
        if abs(F) <= friction:
            return 0.0
        return (F - math.copysign(friction, F)) / mass

    def coast(y: tuple[float, ...], h: float) -> tuple[float, ...]:
        v, i, e_r, e_d, x, u = y
        if friction == 0 or u == 0:
            return (v, i, e_r, e_d, x + u * h, u)
        a = -math.copysign(friction, u) / mass
        stop = -u / a
        if h < stop:
            return (v, i, e_r, e_d, x + u * h + 0.5 * a * h * h, u + a * h)
        return (v, i, e_r, e_d, x + 0.5 * u * stop, 0.0)

    def advance(y: tuple[float, ...], polarity: BridgeState, h: float) -> tuple[float, ...]:
        drive = int(polarity)
        flyback = flyback_sign(polarity, y[1])
        if drive == 0 and flyback == 0:
            if friction == 0 and y[5] == 0:
                return y
            if friction == 0:
                return coast(y, h)
            return rk4_step(y, h, lambda z: (0.0, 0.0, 0.0, 0.0, z[5], acceleration(0.0, z[4], z[5])))

        def rate(z: tuple[float, ...]) -> tuple[float, ...]:
            dv, di, de_r, de_d = derivatives(
                z[0], z[1], drive, flyback, inductance, resistance, capacitance, diode_drop
            )
            return (dv, di, de_r, de_d, z[5], acceleration(z[1], z[4], z[5]))

        after, fraction = flyback_step(y, h, rate, flyback)
        if fraction is not None and fraction < 1.0:
            after = coast(after, (1.0 - fraction) * h) if friction == 0 else advance(
                after, BridgeState.BUFFER, (1.0 - fraction) * h
            )
        return after

    trace_samples = [TraceSample(0.0, 0.0, cap.v, schedule.segments[0].state)]
    kinematics = [KinematicSample(0.0, x_start, 0.0, 0.0)]
    next_log = 1

    def record(t: float, y: tuple[float, ...], polarity: BridgeState) -> None:
        trace_samples.append(TraceSample(t, y[1], y[0], polarity))
        kinematics.append(KinematicSample(t, y[4], y[5], push(y[1], y[4])))

    def move(
        y: tuple[float, ...], t: float, polarity: BridgeState, h: float
    ) -> tuple[tuple[float, ...], float, bool]:
        nonlocal next_log
        after = advance(y, polarity, h)
        t_after = t + h
        exited = after[4] >= x_exit
        if exited:
            fraction = (x_exit - y[4]) / (after[4] - y[4])
            t_after = t + fraction * h
            after = advance(y, polarity, fraction * h)
        while next_log * solver.log_cadence <= t_after + _TIME_TOLERANCE:
            t_log = next_log * solver.log_cadence
            if t_after - t_log <= _TIME_TOLERANCE:
                record(t_log, after, polarity)
            else:
                record(t_log, advance(y, polarity, t_log - t), polarity)
            next_log += 1
        return after, t_after, exited

    y = (cap.v, 0.0, 0.0, 0.0, x_start, 0.0)
    t = 0.0
    polarity = schedule.segments[0].state
    exited = False
    start = 0.0
    for segment in schedule.segments:
        polarity = segment.state
        duration = segment.duration_ms * 1e-3
        count, h = segment_steps(duration, solver.dt_internal)
        for index in range(count):
            y, t, exited = move(y, t, polarity, h)
            if exited:
                break
            t = start + (index + 1) * h
        if exited:
            break
        start += duration
        logger.debug(
            "segment %s done at %.3f ms: I = %.3f A, x = %.3f mm, v = %.4f m/s",
            segment,
            t * 1e3,
            y[1],
            y[4] * 1e3,
            y[5],
        )

    if not exited:
        polarity = BridgeState.BUFFER
        while y[1] != 0 and not exited:
            y, t, exited = move(y, t, polarity, solver.dt_internal)

    stalled = False
    exit_velocity = y[5] if exited else 0.0
    if not exited:
        # The coil is dead: coast to the exit in closed form, or stall.
        distance = x_exit - y[4]
        u = y[5]
        if u > 0 and friction == 0:
            exit_velocity, t, exited = u, t + distance / u, True
        elif u > 0:
            deceleration = friction / mass
            speed_squared = u * u - 2 * deceleration * distance
            if speed_squared > 0:
                exit_velocity = math.sqrt(speed_squared)
                t, exited = t + (u - exit_velocity) / deceleration, True
        if exited:
            y = y[:4] + (x_exit, exit_velocity)
        else:
            stalled = True

    if t > trace_samples[-1].t + _TIME_TOLERANCE:
        record(t, y, polarity)

    trace = CurrentTrace(
        samples=tuple(trace_samples),
        capacitance=capacitance,
        inductance=inductance,
        resistance=resistance,
        diode_drop=diode_drop,
        v_initial=cap.v,
        v_final=y[0],
        i_final=y[1],
        e_resistive=y[2],
        e_diode=y[3],
    )
    audit = audit_energy(trace)
    kinetic = 0.5 * mass * exit_velocity**2
    if kinetic > audit.capacitor_drop:
        raise AuditError(
            f"exit kinetic energy {kinetic:.6g} J exceeds the capacitor's energy drop "
            f"{audit.capacitor_drop:.6g} J"
        )
    eta = efficiency(mass, exit_velocity, capacitance, cap.v, y[0]) if exited else 0.0

    logger.info(
        "launch %s from x0 = %.1f mm: %s at %.4f m/s, efficiency %.4f%%",
        format_schedule(schedule),
        x0 * 1e3,
        "exited" if exited else "stalled",
        exit_velocity if exited else y[5],
        eta * 100,
    )
    return SimResult(
        exit_velocity=float(exit_velocity),
        final_velocity=float(y[5]),
        v_i=cap.v,
        v_f=y[0],
        efficiency=eta,
        trace=trace,
        kinematics=tuple(kinematics),
        stalled=bool(stalled),
        exited=bool(exited),
        audit=audit,
    )
