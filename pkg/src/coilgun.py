# Copyright (c) 2025 Matty Chalk
# Licensed under the MIT License (see LICENSE file for details)

"""Command-line entry point of the coilgun simulator.

Subcommands write their data (CSV or YAML) to stdout or to the files given, and log a short human
summary to stderr. The exit status is 0 on success, 2 on a usage error, and the error's own code
for any simulator error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import TextIO

import numpy as np

from circuit import run_circuit
from config import RunConfig, load_config
from dynamics import ferrite_rod, force_profile, launch, n52_magnet
from errors import CoilgunError, ConfigError
from export import (
    GENERATED_BY,
    csv_text,
    field_frame,
    force_frame,
    kinematics_frame,
    preset_summary,
    simulation_summary,
    sweep_frame,
    sweep_summary,
    trace_frame,
    yaml_text,
)
from ingest import DEAD_BAND, ingest_log
from magnetostatics import field_profile
from objective import Objective
from pulse import parse, parse_template
from sweep import DEFAULT_BUDGET, STRATEGIES, SweepSpec, run_sweep
from winding import DEFAULT_TUBE, PRESET_NAMES, digitize, preset

logger = logging.getLogger("coilgun")


def _emit(text: str, path: str | None, stdout: TextIO) -> None:
    if path is None:
        stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")
        logger.info("wrote %s", path)


def parse_grid(text: str) -> tuple[int, ...]:
    """Parse a duration grid: "5,10,15" or the inclusive range "5:20:5" (ms).

    Parameters
    ----------
    text : str
        The grid.

    Returns
    -------
    tuple[int, ...]
        The durations.
    """
    try:
        if ":" in text:
            start, stop, step = (int(part) for part in text.split(":"))
            if step < 1:
                raise ValueError
            return tuple(range(start, stop + 1, step))
        return tuple(int(part) for part in text.split(","))
    except ValueError as error:
        raise ConfigError(f"grid must look like '5,10,15' or '5:20:5', got '{text}'") from error


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a whole number, got '{text}'") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def _field(args: argparse.Namespace, stdout: TextIO) -> None:
    if args.config is not None:
        config = load_config(args.config)
        stack = config.stack()
        tube = config.tube
    else:
        stack = digitize(preset(args.preset))
        config = None
        tube = DEFAULT_TUBE

    current = args.current
    if args.time_ms is not None:
        if config is None:
            raise ConfigError("--time-ms needs --config to know the pulse schedule")
        trace = run_circuit(
            config.coil_electrical(stack),
            config.cap,
            config.schedule,
            dt_internal=config.solver.dt_internal,
            log_cadence=config.solver.log_cadence,
            diode_drop=config.solver.diode_drop,
        )
        times = [sample.t for sample in trace.samples]
        currents = [sample.i_coil for sample in trace.samples]
        current = float(np.interp(args.time_ms * 1e-3, times, currents, right=0.0))
        logger.info("coil current at %g ms: %.4f A", args.time_ms, current)

    x_min = -20.0 if args.from_mm is None else args.from_mm
    x_max = tube.length * 1e3 + 20.0 if args.to_mm is None else args.to_mm
    samples = field_profile(stack, current, x_min * 1e-3, x_max * 1e-3, args.grid_mm * 1e-3)
    _emit(csv_text(field_frame(samples)), args.out, stdout)
    peak = max(samples, key=lambda sample: abs(sample.B))
    logger.info("%d loops, %d points, |B| peaks at %.6g T at %.2f mm", len(stack), len(samples), abs(peak.B), peak.x * 1e3)

    if args.force_out is not None:
        projectile = n52_magnet() if args.projectile == "magnet" else ferrite_rod()
        profile = force_profile(projectile, stack, current, [sample.x for sample in samples])
        _emit(csv_text(force_frame(profile)), args.force_out, stdout)


def _simulate(args: argparse.Namespace, stdout: TextIO) -> None:
    config = load_config(args.config)
    setup = config.launch_setup()
    if args.pulse is not None:
        setup = replace(setup, schedule=parse(args.pulse))
    if args.x0_mm is not None:
        setup = replace(setup, x0=args.x0_mm * 1e-3)
    result = launch(
        setup.stack,
        setup.coil,
        setup.cap,
        setup.schedule,
        setup.projectile,
        setup.x0,
        tube=setup.tube,
        solver=setup.solver,
    )
    if args.trace is not None:
        _emit(csv_text(trace_frame(result.trace)), args.trace, stdout)
    if args.kinematics is not None:
        _emit(csv_text(kinematics_frame(result.kinematics)), args.kinematics, stdout)
    _emit(yaml_text(simulation_summary(config.name, result)), args.summary, stdout)
    logger.info(
        "%s: %s at %.4f m/s, efficiency %.4f%%",
        config.name,
        "exited" if result.exited else "stalled",
        result.exit_velocity,
        result.efficiency * 100,
    )


def _study(config: RunConfig, spec: SweepSpec, args: argparse.Namespace, stdout: TextIO) -> None:
    result = run_sweep(config.launch_setup(), spec, workers=args.workers)
    _emit(csv_text(sweep_frame(result)), args.out, stdout)
    summary = sweep_summary(config.name, result)
    if args.summary is not None:
        _emit(yaml_text(summary), args.summary, stdout)
    logger.info(
        "%s: best %s of %d points, %.4f m/s, efficiency %.4f%%",
        config.name,
        result.best.input,
        len(result.points),
        result.best.velocity,
        result.best.efficiency * 100,
    )


def _sweep(args: argparse.Namespace, stdout: TextIO) -> None:
    config = load_config(args.config)
    objective = Objective(args.objective) if args.objective else None
    if args.range_mm is not None:
        spec = SweepSpec(
            variable="displacement",
            objective=objective or Objective.VELOCITY,
            range_mm=tuple(args.range_mm),
        )
    elif config.sweep is not None and config.sweep.variable == "displacement":
        spec = config.sweep
        if objective is not None:
            spec = SweepSpec(variable="displacement", objective=objective, range_mm=spec.range_mm)
    else:
        raise ConfigError("sweep needs --range-mm or a displacement sweep block in the config")
    _study(config, spec, args, stdout)


def _optimize(args: argparse.Namespace, stdout: TextIO) -> None:
    config = load_config(args.config)
    base = config.sweep if config.sweep is not None and config.sweep.variable == "pulse_grid" else None
    if args.template is None and base is None:
        raise ConfigError("optimize needs --template or a pulse_grid sweep block in the config")
    template = parse_template(args.template) if args.template is not None else base.template
    if args.grid:
        grids = tuple(parse_grid(text) for text in args.grid)
    elif base is not None and args.template is None:
        grids = base.grids
    else:
        raise ConfigError("optimize needs one --grid per free slot of the template")

    if args.objective is not None:
        objective = Objective(args.objective)
    else:
        objective = base.objective if base is not None else Objective.VELOCITY
    spec = SweepSpec(
        variable="pulse_grid",
        objective=objective,
        template=template,
        grids=grids,
        budget=args.budget if args.budget is not None else base.budget if base is not None else DEFAULT_BUDGET,
        strategy=args.strategy or (base.strategy if base is not None else "exhaustive"),
    )
    _study(config, spec, args, stdout)


def _ingest(args: argparse.Namespace, stdout: TextIO) -> None:
    log, report = ingest_log(args.log, resistance=args.resistance, dead_band=args.dead_band)
    summary = {
        "generated_by": GENERATED_BY,
        "log": str(args.log),
        "rows": len(log.t_ms),
        "charge_C": float(f"{report.charge:.12g}"),
        "peak_current_A": float(f"{report.peak_current:.12g}"),
        "resistive_energy_J": None
        if report.resistive_energy is None
        else float(f"{report.resistive_energy:.12g}"),
        "schedule": report.schedule,
        "runs": [
            {"state": run.state.value, "start_ms": run.start_ms, "end_ms": run.end_ms}
            for run in report.runs
        ],
    }
    _emit(yaml_text(summary), args.out, stdout)
    logger.info("%s: %d rows, inferred schedule %s", args.log, len(log.t_ms), report.schedule)


def _presets(args: argparse.Namespace, stdout: TextIO) -> None:
    entries = [preset_summary(name) for name in PRESET_NAMES]
    if args.write_dir is not None:
        directory = Path(args.write_dir)
        directory.mkdir(parents=True, exist_ok=True)
        for entry in entries:
            _emit(yaml_text(entry), str(directory / f"{entry['name']}.yaml"), stdout)
        return
    _emit(yaml_text({"generated_by": GENERATED_BY, "presets": entries}), None, stdout)


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser of the tool."""
    parser = argparse.ArgumentParser(
        prog="coilgun", description="Single-stage coilgun simulator and pulse optimiser"
    )
    parser.add_argument("--version", action="version", version=GENERATED_BY)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="log integrator progress")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="log warnings and errors only")
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    field = commands.add_parser("field", help="on-axis field of a coil as CSV")
    source = field.add_mutually_exclusive_group(required=True)
    source.add_argument("--preset", choices=PRESET_NAMES)
    source.add_argument("--config", help="run file giving the coil, wire and tube")
    field.add_argument("--current", type=float, default=1.0, help="coil current in A (default 1)")
    field.add_argument("--time-ms", type=float, help="use the simulated current at this time instead")
    field.add_argument("--grid-mm", type=float, default=0.1, help="sample spacing in mm (default 0.1)")
    field.add_argument("--from-mm", type=float, help="first sample in mm (default -20)")
    field.add_argument("--to-mm", type=float, help="last sample in mm (default 20 past the tube end)")
    field.add_argument("--force-out", help="also write the axial force on a projectile to this file")
    field.add_argument("--projectile", choices=("magnet", "ferrite"), default="magnet")
    field.add_argument("--out", help="CSV file (default stdout)")

    simulate = commands.add_parser("simulate", help="fire one shot")
    simulate.add_argument("config", help="run file")
    simulate.add_argument("--pulse", help="schedule to fire instead of the run file's, e.g. \"F5 B5 R5\"")
    simulate.add_argument("--x0-mm", type=float, help="initial displacement in mm instead of the run file's")
    simulate.add_argument("--trace", help="write the circuit trace CSV here")
    simulate.add_argument("--kinematics", help="write the projectile CSV here")
    simulate.add_argument("--summary", help="YAML summary file (default stdout)")

    for name, help_text in (
        ("sweep", "sweep the initial displacement"),
        ("optimize", "search pulse durations"),
    ):
        study = commands.add_parser(name, help=help_text)
        study.add_argument("config", help="run file")
        study.add_argument("--objective", choices=[objective.value for objective in Objective])
        study.add_argument("--workers", type=_positive_int, default=1, help="processes to use (default 1)")
        study.add_argument("--out", help="CSV file (default stdout)")
        study.add_argument("--summary", help="write the YAML summary here")
        if name == "sweep":
            study.add_argument("--range-mm", type=float, nargs=3, metavar=("MIN", "MAX", "STEP"))
        else:
            study.add_argument("--template", help="schedule shape such as 'F? B? R?'")
            study.add_argument("--grid", action="append", help="durations of one slot: '5,10' or '5:20:5'")
            study.add_argument("--strategy", choices=STRATEGIES)
            study.add_argument("--budget", type=_positive_int)

    ingest = commands.add_parser("ingest", help="analyse a measured sensor log")
    ingest.add_argument("log", help="CSV with header t_ms,sensor_V")
    ingest.add_argument("--resistance", type=float, help="coil resistance in ohm")
    ingest.add_argument("--dead-band", type=float, default=DEAD_BAND, help="current in A counted as off")
    ingest.add_argument("--out", help="YAML report file (default stdout)")

    presets = commands.add_parser("presets", help="list the winding presets")
    presets.add_argument("--write-dir", help="write one YAML file per preset here")
    return parser


def cli(argv: list[str] | None = None, stdout: TextIO | None = None) -> int:
    """Run the tool and return its exit status.

    Parameters
    ----------
    argv : list[str], optional
        Arguments without the program name. Default is `sys.argv[1:]`.
    stdout : TextIO, optional
        Stream for data written to standard output. Default is `sys.stdout`.

    Returns
    -------
    int
        0 on success, 2 on a usage error, otherwise the exit code of the error raised.
    """
    stdout = sys.stdout if stdout is None else stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return 0 if exit_.code is None else int(exit_.code)

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(
        level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True
    )

    handlers = {
        "field": _field,
        "simulate": _simulate,
        "sweep": _sweep,
        "optimize": _optimize,
        "ingest": _ingest,
        "presets": _presets,
    }
    try:
        handlers[args.command](args, stdout)
    except CoilgunError as error:
        logger.error("%s: %s", type(error).__name__, error)
        return error.exit_code
    except (OSError, ValueError) as error:
        logger.error("%s", error)
        return 1
    return 0


def main() -> None:
    sys.exit(cli())


if __name__ == "__main__":
    main()
