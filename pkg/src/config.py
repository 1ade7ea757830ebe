# Copyright (c) 2025 Matty Chalk
# Licensed under the MIT License (see LICENSE file for details)

"""Module defining run configuration files and the catalogue of published results.

A run file is YAML in engineering units (mm, ms, us, uH, g, V, F) and describes one launch,
optionally with a `sweep` block turning it into a study. Everything is converted to SI on load.
Unknown keys at any level are rejected with the path of the key.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from circuit import Capacitor
from dynamics import (
    DEFAULT_FERRITE_COUPLING,
    DEFAULT_FERRITE_SATURATION,
    DEFAULT_MAGNET_MOMENT,
    FERRITE_MASS,
    N52_MASS,
    InducedDipole,
    PermanentDipole,
    Projectile,
    SolverSettings,
)
from errors import ConfigError
from objective import Objective
from pulse import PulseSchedule, format_schedule, parse, parse_template
from sweep import DEFAULT_BUDGET, LaunchSetup, SweepSpec
from winding import (
    DEFAULT_TUBE,
    DEFAULT_WIRE,
    CoilElectrical,
    LoopStack,
    TubeSpec,
    WindingProfile,
    WireSpec,
    digitize,
    estimate_electrical,
    preset,
    profile_from_dict,
    profile_to_dict,
)

logger = logging.getLogger(__name__)

DEFAULT_CAPACITANCE = 0.12
DEFAULT_VOLTAGE = 45.0

REQUIRED_KEYS = ("coil", "projectile", "schedule")
TOP_LEVEL_KEYS = (
    "name",
    "coil",
    "wire",
    "tube",
    "capacitor",
    "projectile",
    "schedule",
    "x0_mm",
    "solver",
    "sweep",
)


@dataclass(frozen=True)
class RunConfig:
    """A fully validated run.

    `profile` always gives the field. `electrical`, when set, overrides the estimate from the
    profile for the circuit.
    """

    name: str
    profile: WindingProfile
    electrical: CoilElectrical | None
    wire: WireSpec
    tube: TubeSpec
    cap: Capacitor
    projectile: Projectile
    schedule: PulseSchedule
    x0: float = 0.0
    solver: SolverSettings = field(default_factory=SolverSettings)
    sweep: SweepSpec | None = None

    def stack(self) -> LoopStack:
        """Digitize the profile on the configured wire and tube."""
        return digitize(self.profile, wire=self.wire, tube=self.tube)

    def coil_electrical(self, stack: LoopStack | None = None) -> CoilElectrical:
        """Return the override if there is one, otherwise the estimate from the loops."""
        if self.electrical is not None:
            return self.electrical
        return estimate_electrical(self.stack() if stack is None else stack, wire=self.wire)

    def launch_setup(self) -> LaunchSetup:
        """Return the `LaunchSetup` of this run."""
        stack = self.stack()
        return LaunchSetup(
            stack=stack,
            coil=self.coil_electrical(stack),
            cap=self.cap,
            schedule=self.schedule,
            projectile=self.projectile,
            x0=self.x0,
            tube=self.tube,
            solver=self.solver,
        )


def _round(value: float) -> float:
    return float(f"{value:.12g}")


def _mapping(data: object, path: str, allowed: tuple[str, ...]) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must be a mapping, got {type(data).__name__}")
    unknown = [str(key) for key in data if key not in allowed]
    if unknown:
        raise ConfigError(
            "unknown key(s): " + ", ".join(f"{path}.{key}" if path else key for key in sorted(unknown))
        )
    return data


def _number(section: dict, key: str, path: str, default: float | None = None) -> float:
    where = f"{path}.{key}" if path else key
    if key not in section:
        if default is None:
            raise ConfigError(f"{where} is required")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return float(value)


def _build(path: str, factory, **kwargs):
    try:
        return factory(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as error:
        raise ConfigError(f"{path}: {error}") from error


def _parse_coil(data: object, tube: TubeSpec) -> tuple[WindingProfile, CoilElectrical | None]:
    coil = _mapping(data, "coil", ("preset", "profile", "electrical"))
    if ("preset" in coil) == ("profile" in coil):
        raise ConfigError("coil must have exactly one of coil.preset and coil.profile")
    if "preset" in coil:
        if not isinstance(coil["preset"], str):
            raise ConfigError(f"coil.preset must be a name, got {coil['preset']!r}")
        profile = preset(coil["preset"], tube_length=tube.length)
    else:
        profile = profile_from_dict(coil["profile"])

    electrical = None
    if "electrical" in coil:
        section = _mapping(coil["electrical"], "coil.electrical", ("inductance_uH", "resistance_ohm"))
        electrical = _build(
            "coil.electrical",
            CoilElectrical,
            inductance=_number(section, "inductance_uH", "coil.electrical") * 1e-6,
            resistance=_number(section, "resistance_ohm", "coil.electrical"),
        )
    return profile, electrical


def _parse_projectile(data: object) -> Projectile:
    section = _mapping(
        data,
        "projectile",
        (
            "kind",
            "mass_g",
            "half_length_mm",
            "moment_Am2",
            "orientation",
            "coupling_Am2_per_T",
            "saturation_Am2",
        ),
    )
    kind = section.get("kind")
    half_length = _number(section, "half_length_mm", "projectile", 0.0) * 1e-3
    match kind:
        case "permanent":
            for key in ("coupling_Am2_per_T", "saturation_Am2"):
                if key in section:
                    raise ConfigError(f"projectile.{key} does not apply to a permanent dipole")
            orientation = section.get("orientation", 1)
            if orientation not in (1, -1) or isinstance(orientation, bool):
                raise ConfigError(f"projectile.orientation must be 1 or -1, got {orientation!r}")
            model = _build(
                "projectile",
                PermanentDipole,
                moment=_number(section, "moment_Am2", "projectile", DEFAULT_MAGNET_MOMENT),
                orientation=orientation,
            )
            mass = _number(section, "mass_g", "projectile", N52_MASS * 1e3) * 1e-3
        case "induced":
            for key in ("moment_Am2", "orientation"):
                if key in section:
                    raise ConfigError(f"projectile.{key} does not apply to an induced dipole")
            model = _build(
                "projectile",
                InducedDipole,
                coupling=_number(section, "coupling_Am2_per_T", "projectile", DEFAULT_FERRITE_COUPLING),
                saturation_moment=_number(
                    section, "saturation_Am2", "projectile", DEFAULT_FERRITE_SATURATION
                ),
            )
            mass = _number(section, "mass_g", "projectile", FERRITE_MASS * 1e3) * 1e-3
        case _:
            raise ConfigError(f"projectile.kind must be 'permanent' or 'induced', got {kind!r}")
    return _build("projectile", Projectile, mass=mass, model=model, half_length=half_length)


def _parse_solver(data: object) -> SolverSettings:
    section = _mapping(
        data,
        "solver",
        ("dt_internal_us", "log_cadence_ms", "diode_drop_V", "friction_N", "field_step_mm"),
    )
    defaults = SolverSettings()
    return _build(
        "solver",
        SolverSettings,
        dt_internal=_number(section, "dt_internal_us", "solver", defaults.dt_internal * 1e6) * 1e-6,
        log_cadence=_number(section, "log_cadence_ms", "solver", defaults.log_cadence * 1e3) * 1e-3,
        diode_drop=_number(section, "diode_drop_V", "solver", defaults.diode_drop),
        friction=_number(section, "friction_N", "solver", defaults.friction),
        field_step=_number(section, "field_step_mm", "solver", defaults.field_step * 1e3) * 1e-3,
    )


def _parse_objective(value: object) -> Objective:
    try:
        return Objective(value)
    except ValueError as error:
        raise ConfigError(f"sweep.objective must be 'velocity' or 'efficiency', got {value!r}") from error


def _parse_sweep(data: object) -> SweepSpec:
    section = _mapping(
        data,
        "sweep",
        ("variable", "objective", "range_mm", "template", "grids", "budget", "strategy"),
    )
    variable = section.get("variable")
    objective = _parse_objective(section.get("objective", "velocity"))
    match variable:
        case "displacement":
            for key in ("template", "grids", "budget", "strategy"):
                if key in section:
                    raise ConfigError(f"sweep.{key} does not apply to a displacement sweep")
            bounds = section.get("range_mm")
            if not isinstance(bounds, list) or len(bounds) != 3:
                raise ConfigError("sweep.range_mm must be [min, max, step]")
            numbers = {str(index): value for index, value in enumerate(bounds)}
            range_mm = tuple(_number(numbers, str(index), "sweep.range_mm") for index in range(3))
            return SweepSpec(variable=variable, objective=objective, range_mm=range_mm)
        case "pulse_grid":
            if "range_mm" in section:
                raise ConfigError("sweep.range_mm does not apply to a pulse search")
            if not isinstance(section.get("template"), str):
                raise ConfigError("sweep.template must be a template string such as 'F? B? R?'")
            grids = section.get("grids")
            if not isinstance(grids, list) or not all(isinstance(grid, list) for grid in grids):
                raise ConfigError("sweep.grids must be a list of lists of durations (ms)")
            return SweepSpec(
                variable=variable,
                objective=objective,
                template=parse_template(section["template"]),
                grids=tuple(tuple(grid) for grid in grids),
                budget=section.get("budget", DEFAULT_BUDGET),
                strategy=section.get("strategy", "exhaustive"),
            )
        case _:
            raise ConfigError(f"sweep.variable must be 'displacement' or 'pulse_grid', got {variable!r}")


def config_from_dict(data: object) -> RunConfig:
    """Validate a parsed run file and build its `RunConfig`.

    Parameters
    ----------
    data : object
        The parsed YAML document.

    Returns
    -------
    `RunConfig`
        The run, in SI units, with defaults filled in.
    """
    if data is None:
        data = {}
    data = _mapping(data, "", TOP_LEVEL_KEYS)
    missing = [key for key in REQUIRED_KEYS if key not in data]
    if missing:
        raise ConfigError(f"missing required field(s): {', '.join(missing)}")

    wire_section = _mapping(
        data.get("wire", {}), "wire", ("bare_diameter_mm", "pitch_mm", "resistance_ohm_per_m")
    )
    wire = _build(
        "wire",
        WireSpec,
        bare_diameter=_number(wire_section, "bare_diameter_mm", "wire", DEFAULT_WIRE.bare_diameter * 1e3)
        * 1e-3,
        pitch=_number(wire_section, "pitch_mm", "wire", DEFAULT_WIRE.pitch * 1e3) * 1e-3,
        resistance_per_length=_number(
            wire_section, "resistance_ohm_per_m", "wire", DEFAULT_WIRE.resistance_per_length
        ),
    )
    tube_section = _mapping(data.get("tube", {}), "tube", ("length_mm", "outer_radius_mm"))
    tube = _build(
        "tube",
        TubeSpec,
        length=_number(tube_section, "length_mm", "tube", DEFAULT_TUBE.length * 1e3) * 1e-3,
        outer_radius=_number(tube_section, "outer_radius_mm", "tube", DEFAULT_TUBE.outer_radius * 1e3)
        * 1e-3,
    )
    cap_section = _mapping(data.get("capacitor", {}), "capacitor", ("capacitance_F", "voltage_V", "esr_ohm"))
    cap = _build(
        "capacitor",
        Capacitor,
        capacitance=_number(cap_section, "capacitance_F", "capacitor", DEFAULT_CAPACITANCE),
        v=_number(cap_section, "voltage_V", "capacitor", DEFAULT_VOLTAGE),
        esr=_number(cap_section, "esr_ohm", "capacitor", 0.0),
    )

    profile, electrical = _parse_coil(data["coil"], tube)
    if not isinstance(data["schedule"], str):
        raise ConfigError(f"schedule must be a pulse string such as 'F5 B5 R5', got {data['schedule']!r}")
    schedule = parse(data["schedule"])
    name = data.get("name", profile.name)
    if not isinstance(name, str):
        raise ConfigError(f"name must be a string, got {name!r}")

    return RunConfig(
        name=name,
        profile=profile,
        electrical=electrical,
        wire=wire,
        tube=tube,
        cap=cap,
        projectile=_parse_projectile(data["projectile"]),
        schedule=schedule,
        x0=_number(data, "x0_mm", "", 0.0) * 1e-3,
        solver=_parse_solver(data.get("solver", {})),
        sweep=_parse_sweep(data["sweep"]) if "sweep" in data else None,
    )


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a run file.

    Parameters
    ----------
    path : str | `Path`
        The YAML run file.

    Returns
    -------
    `RunConfig`
        The validated run.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as error:
        raise ConfigError(f"cannot read config file {path}: {error.strerror}") from error
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as error:
        raise ConfigError(f"{path} is not valid YAML: {error}") from error
    config = config_from_dict(data)
    logger.info("loaded config '%s' from %s", config.name, path)
    return config


def config_to_dict(config: RunConfig) -> dict:
    """Return the expanded file form of a run: presets become explicit profiles."""
    data: dict = {"name": config.name, "coil": {"profile": profile_to_dict(config.profile)}}
    if config.electrical is not None:
        data["coil"]["electrical"] = {
            "inductance_uH": _round(config.electrical.inductance * 1e6),
            "resistance_ohm": _round(config.electrical.resistance),
        }
    data["wire"] = {
        "bare_diameter_mm": _round(config.wire.bare_diameter * 1e3),
        "pitch_mm": _round(config.wire.pitch * 1e3),
        "resistance_ohm_per_m": _round(config.wire.resistance_per_length),
    }
    data["tube"] = {
        "length_mm": _round(config.tube.length * 1e3),
        "outer_radius_mm": _round(config.tube.outer_radius * 1e3),
    }
    data["capacitor"] = {
        "capacitance_F": _round(config.cap.capacitance),
        "voltage_V": _round(config.cap.v),
        "esr_ohm": _round(config.cap.esr),
    }

    model = config.projectile.model
    projectile: dict = {"mass_g": _round(config.projectile.mass * 1e3)}
    if isinstance(model, PermanentDipole):
        projectile = {"kind": "permanent", **projectile}
        projectile["moment_Am2"] = _round(model.moment)
        projectile["orientation"] = model.orientation
    else:
        projectile = {"kind": "induced", **projectile}
        projectile["coupling_Am2_per_T"] = _round(model.coupling)
        projectile["saturation_Am2"] = _round(model.saturation_moment)
    projectile["half_length_mm"] = _round(config.projectile.half_length * 1e3)
    data["projectile"] = projectile

    data["schedule"] = format_schedule(config.schedule)
    data["x0_mm"] = _round(config.x0 * 1e3)
    data["solver"] = {
        "dt_internal_us": _round(config.solver.dt_internal * 1e6),
        "log_cadence_ms": _round(config.solver.log_cadence * 1e3),
        "diode_drop_V": _round(config.solver.diode_drop),
        "friction_N": _round(config.solver.friction),
        "field_step_mm": _round(config.solver.field_step * 1e3),
    }

    sweep = config.sweep
    if sweep is not None:
        match sweep.variable:
            case "displacement":
                data["sweep"] = {
                    "variable": sweep.variable,
                    "objective": sweep.objective.value,
                    "range_mm": [_round(value) for value in sweep.range_mm],
                }
            case "pulse_grid":
                data["sweep"] = {
                    "variable": sweep.variable,
                    "objective": sweep.objective.value,
                    "template": str(sweep.template),
                    "grids": [list(grid) for grid in sweep.grids],
                    "budget": sweep.budget,
                    "strategy": sweep.strategy,
                }
    return data


def dump_config(config: RunConfig) -> str:
    """Return the expanded YAML text of a run. Loading it gives back the same run."""
    return yaml.safe_dump(config_to_dict(config), sort_keys=False)


@dataclass(frozen=True)
class PublishedResult:
    """One published row: the best exit velocity and the best efficiency found for a coil.

    `preset` is None for a coil whose geometry was never described; `config` names the shipped
    run file reproducing the best-velocity shot, if there is one.
    """

    coil_id: str
    preset: str | None
    projectile: str
    velocity: float
    velocity_profile: str
    efficiency: float
    efficiency_profile: str
    config: str | None


PUBLISHED_RESULTS = (
    PublishedResult("Standard (ferrite)", "single", "induced", 2.64, "F50", 0.0003, "F10", "best_standard_ferrite.cfg"),
    PublishedResult("Standard (single, magnet)", "single", "permanent", 4.32, "F32", 0.0019, "F14", "best_standard_unipolar.cfg"),
    PublishedResult("Standard (magnet)", "single", "permanent", 6.34, "F18 B41 R18", 0.0023, "F14 B45 R14", "best_standard_bipolar.cfg"),
    PublishedResult("Double (magnet)", "double", "permanent", 8.79, "F14 B6 R14", 0.0053, "F5", "best_double.cfg"),
    PublishedResult("Three Discs (Coil 3M)", None, "permanent", 3.26, "F10", 0.0014, "F10", None),
    PublishedResult("Linear Accelerator", "linear-accelerator", "permanent", 11.27, "F5 B5 F5 B4 F4 B3 F2 B1 F2", 0.0086, "F5 B5 F5 B4 F4 B3 F2", "best_linear_accelerator.cfg"),
    PublishedResult("Dual 9-5-1-5-9 (Coil G)", "dual-9-5-1-5-9", "permanent", 11.76, "F5 B5 R5 B10 F5 B5 R4", 0.0111, "F5 B5 R4", "table1_coilG.cfg"),
    PublishedResult("Exponential (Coil S)", "exponential", "permanent", 11.03, "F9 B5 R5", 0.0149, "F9", "best_coilS.cfg"),
    PublishedResult("T-shape (Coil T)", "t-shape", "permanent", 8.47, "F5 B16 R3", 0.0178, "F5", "best_coilT.cfg"),
)
