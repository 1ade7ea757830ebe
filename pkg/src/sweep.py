# Copyright (c) 2025 Matty Chalk
# Licensed under the MIT License (see LICENSE file for details)

"""Module defining parameter studies: initial-displacement sweeps and pulse-schedule searches.

Every point of a study is an independent launch. Points can be spread over a process pool; the
results are always sorted by input before the best point is chosen, so serial and parallel runs
agree exactly. A launch that fails its energy audit is logged and kept as a failed point, and the
study goes on.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from multiprocessing import Pool

from circuit import Capacitor
from dynamics import FIELD_MARGIN, Projectile, SolverSettings, launch
from errors import AuditError, BudgetError, ConfigError
from magnetostatics import FieldTable
from objective import Objective
from pulse import MAX_TOTAL_MS, PulseSchedule, PulseTemplate, fill_template, format_schedule
from winding import DEFAULT_TUBE, CoilElectrical, LoopStack, TubeSpec

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 100_000

STRATEGIES = ("exhaustive", "coordinate")

# Slack on the displacement grid count so that 0-60 mm in 2 mm steps keeps its 60 mm end point.
_GRID_TOLERANCE = 1e-9


@dataclass(frozen=True)
class LaunchSetup:
    """Everything a launch needs apart from the quantity a study varies."""

    stack: LoopStack
    coil: CoilElectrical
    cap: Capacitor
    schedule: PulseSchedule
    projectile: Projectile
    x0: float = 0.0
    tube: TubeSpec = DEFAULT_TUBE
    solver: SolverSettings = field(default_factory=SolverSettings)


@dataclass(frozen=True)
class SweepSpec:
    """What a study varies and what it maximises.

    Parameters
    ----------
    variable : str
        "displacement" or "pulse_grid".
    objective : `Objective`, optional
        Quantity the best point maximises. Default is VELOCITY.
    range_mm : tuple[float, float, float], optional
        (min, max, step) of the initial displacement (mm), for "displacement".
    template : `PulseTemplate`, optional
        Schedule shape, for "pulse_grid".
    grids : tuple[tuple[int, ...], ...], optional
        Candidate durations (ms) of each free slot of `template`, for "pulse_grid".
    budget : int, optional
        Largest number of launches a search may run. Default is 100 000.
    strategy : str, optional
        "exhaustive" or "coordinate", for "pulse_grid". Default is "exhaustive".
    """

    variable: str
    objective: Objective = Objective.VELOCITY
    range_mm: tuple[float, float, float] | None = None
    template: PulseTemplate | None = None
    grids: tuple[tuple[int, ...], ...] = ()
    budget: int = DEFAULT_BUDGET
    strategy: str = "exhaustive"

    def __post_init__(self) -> None:
        if not isinstance(self.objective, Objective):
            raise TypeError(f"objective must be Objective, got {type(self.objective).__name__}")
        match self.variable:
            case "displacement":
                if self.range_mm is None or len(self.range_mm) != 3:
                    raise ConfigError("sweep.range_mm must be [min, max, step]")
                low, high, step = self.range_mm
                if not step > 0:
                    raise ConfigError(f"sweep.range_mm step must be greater than 0, got {step}")
                if not high >= low:
                    raise ConfigError(f"sweep.range_mm max must be at least min ({low}), got {high}")
            case "pulse_grid":
                if self.template is None:
                    raise ConfigError("sweep.template is required for a pulse search")
                if len(self.grids) != self.template.free_slots:
                    raise ConfigError(
                        f"sweep.grids must have {self.template.free_slots} entries for "
                        f"'{self.template}', got {len(self.grids)}"
                    )
                for index, grid in enumerate(self.grids):
                    if len(grid) == 0:
                        raise ConfigError(f"sweep.grids[{index}] must not be empty")
                    for value in grid:
                        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                            raise ConfigError(
                                f"sweep.grids[{index}] must hold whole ms of at least 1, got {value!r}"
                            )
                if self.strategy not in STRATEGIES:
                    raise ConfigError(f"sweep.strategy must be one of {STRATEGIES}, got {self.strategy!r}")
                if isinstance(self.budget, bool) or not isinstance(self.budget, int) or self.budget < 1:
                    raise ConfigError(f"sweep.budget must be a positive int, got {self.budget!r}")
            case _:
                raise ConfigError(
                    f"sweep.variable must be 'displacement' or 'pulse_grid', got {self.variable!r}"
                )

    def displacements_mm(self) -> list[float]:
        """Return the inclusive displacement grid (mm)."""
        low, high, step = self.range_mm
        count = math.floor((high - low) / step + _GRID_TOLERANCE) + 1
        return [float(f"{low + k * step:.12g}") for k in range(count)]


@dataclass(frozen=True)
class SweepPoint:
    """One launch of a study.

    `input` is the displacement (mm) or the schedule text; `key` orders the points.
    A launch that failed its energy audit is kept with NaN velocity and efficiency.
    """

    input: float | str
    key: tuple
    velocity: float
    efficiency: float

    @property
    def failed(self) -> bool:
        return math.isnan(self.velocity)

    def value(self, objective: Objective) -> float:
        """Return the quantity `objective` maximises at this point."""
        match objective:
            case Objective.VELOCITY:
                return self.velocity
            case Objective.EFFICIENCY:
                return self.efficiency

    def beats(self, other: SweepPoint, objective: Objective) -> bool:
        """Return True if this point is strictly better than `other`; failed points never win."""
        if self.failed:
            return False
        return other.failed or self.value(objective) > other.value(objective)


@dataclass(frozen=True)
class SweepResult:
    """The evaluated points of a study, sorted by input, and the objective it maximised."""

    points: tuple[SweepPoint, ...]
    objective: Objective

    def argmax(self, objective: Objective | None = None) -> SweepPoint:
        """Return the best point for `objective`, the smallest input among equals.

        Parameters
        ----------
        objective : `Objective`, optional
            Defaults to the study's own objective.

        Returns
        -------
        `SweepPoint`
            A member of `points` that did not fail.

        Raises
        ------
        AuditError
            If every point failed its energy audit.
        """
        objective = self.objective if objective is None else objective
        best = self.points[0]
        for point in self.points[1:]:
            if point.beats(best, objective):
                best = point
        if best.failed:
            raise AuditError(f"all {len(self.points)} launches of the study failed their energy audit")
        return best

    @property
    def failures(self) -> int:
        return sum(point.failed for point in self.points)

    @property
    def best(self) -> SweepPoint:
        return self.argmax()


_worker_state: dict = {}


def _init_worker(setup: LaunchSetup, table: FieldTable) -> None:
    _worker_state["setup"] = setup
    _worker_state["table"] = table


def _launch_point(
    setup: LaunchSetup, table: FieldTable, task: tuple[float, PulseSchedule]
) -> tuple[float, float]:
    x0, schedule = task
    try:
        result = launch(
            setup.stack,
            setup.coil,
            setup.cap,
            schedule,
            setup.projectile,
            x0,
            tube=setup.tube,
            solver=setup.solver,
            field_table=table,
        )
    except AuditError as error:
        logger.warning("%s from x0 = %g mm failed: %s", format_schedule(schedule), x0 * 1e3, error)
        return math.nan, math.nan
    return result.exit_velocity, result.efficiency


def _pooled_launch(task: tuple[float, PulseSchedule]) -> tuple[float, float]:
    return _launch_point(_worker_state["setup"], _worker_state["table"], task)


def _evaluate(
    setup: LaunchSetup,
    table: FieldTable,
    tasks: list[tuple[float, PulseSchedule]],
    workers: int,
) -> list[tuple[float, float]]:
    if workers == 1 or len(tasks) < 2:
        return [_launch_point(setup, table, task) for task in tasks]
    with Pool(min(workers, len(tasks)), initializer=_init_worker, initargs=(setup, table)) as pool:
        return pool.map(_pooled_launch, tasks)


def _check_workers(workers: int) -> None:
    if isinstance(workers, bool) or not isinstance(workers, int):
        raise TypeError(f"workers must be int, got {type(workers).__name__}")
    if workers < 1:
        raise ValueError(f"workers must be at least 1, got {workers}")


def _shared_table(setup: LaunchSetup, farthest_x0: float) -> FieldTable:
    x_exit = setup.tube.length + setup.projectile.half_length
    return FieldTable.build(
        setup.stack,
        -farthest_x0 - FIELD_MARGIN,
        x_exit + FIELD_MARGIN,
        setup.solver.field_step,
    )


def sweep_displacement(setup: LaunchSetup, spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Launch once per initial displacement on the grid of `spec`.

    Parameters
    ----------
    setup : `LaunchSetup`
        Coil, capacitor, schedule and projectile; `setup.x0` is ignored.
    spec : `SweepSpec`
        A "displacement" study.
    workers : int, optional
        Processes to spread the launches over. Default is 1.

    Returns
    -------
    `SweepResult`
        Every grid point in increasing displacement.
    """
    _check_workers(workers)
    if spec.variable != "displacement":
        raise ConfigError(f"sweep.variable must be 'displacement', got {spec.variable!r}")
    displacements = spec.displacements_mm()
    if not displacements:
        raise ConfigError("sweep.range_mm gives an empty grid")

    logger.info(
        "displacement sweep: %d points from %g mm to %g mm with %s",
        len(displacements),
        displacements[0],
        displacements[-1],
        format_schedule(setup.schedule),
    )
    table = _shared_table(setup, max(displacements) * 1e-3)
    tasks = [(x0_mm * 1e-3, setup.schedule) for x0_mm in displacements]
    outcomes = _evaluate(setup, table, tasks, workers)
    points = tuple(
        SweepPoint(input=x0_mm, key=(x0_mm,), velocity=velocity, efficiency=eta)
        for x0_mm, (velocity, eta) in zip(displacements, outcomes)
    )
    result = SweepResult(points=points, objective=spec.objective)
    logger.info("best displacement %g mm", result.best.input)
    return result


def search_pulses(
    setup: LaunchSetup,
    template: PulseTemplate,
    grids: tuple[tuple[int, ...], ...],
    objective: Objective = Objective.VELOCITY,
    budget: int = DEFAULT_BUDGET,
    strategy: str = "exhaustive",
    workers: int = 1,
) -> SweepResult:
    """Search the durations of the free slots of `template` for the best schedule.

    "exhaustive" launches every combination of the grids. "coordinate" starts from the first value of
    each grid and makes one pass over the slots, setting each to its best value with the others held.

    Parameters
    ----------
    setup : `LaunchSetup`
        Coil, capacitor, projectile and displacement; `setup.schedule` is ignored.
    template : `PulseTemplate`
        Schedule shape with at least one free slot.
    grids : tuple[tuple[int, ...], ...]
        Candidate durations (ms) per free slot. Duplicates are dropped and each grid is sorted.
    objective : `Objective`, optional
        Default is VELOCITY.
    budget : int, optional
        Largest number of launches allowed. Default is 100 000.
    strategy : str, optional
        Default is "exhaustive".
    workers : int, optional
        Processes to spread the launches over. Default is 1.

    Returns
    -------
    `SweepResult`
        Every evaluated schedule in lexicographic order of its durations.
    """
    _check_workers(workers)
    grids = tuple(tuple(sorted(set(grid))) for grid in grids)
    spec = SweepSpec(
        variable="pulse_grid",
        objective=objective,
        template=template,
        grids=grids,
        budget=budget,
        strategy=strategy,
    )

    runs = math.prod(len(grid) for grid in grids) if strategy == "exhaustive" else sum(map(len, grids))
    if runs > budget:
        raise BudgetError(f"{strategy} search over '{template}' needs {runs} launches, budget is {budget}")
    fixed = sum(duration for _, duration in template.slots if duration is not None)
    longest = fixed + sum(grid[-1] for grid in grids)
    if longest > MAX_TOTAL_MS:
        raise ConfigError(
            f"sweep.grids allow a {longest} ms schedule, longer than the {MAX_TOTAL_MS} ms limit"
        )

    logger.info("%s search over '%s': up to %d launches", strategy, template, runs)
    table = _shared_table(setup, setup.x0)
    evaluated: dict[tuple[int, ...], SweepPoint] = {}

    def run(combinations: list[tuple[int, ...]]) -> None:
        pending = [durations for durations in combinations if durations not in evaluated]
        tasks = [(setup.x0, fill_template(template, durations)) for durations in pending]
        for durations, (x0, schedule), (velocity, eta) in zip(
            pending, tasks, _evaluate(setup, table, tasks, workers)
        ):
            evaluated[durations] = SweepPoint(
                input=format_schedule(schedule), key=durations, velocity=velocity, efficiency=eta
            )

    match spec.strategy:
        case "exhaustive":
            run(list(itertools.product(*grids)))
        case "coordinate":
            current = [grid[0] for grid in grids]
            for slot, grid in enumerate(grids):
                candidates = [tuple(current[:slot]) + (value,) + tuple(current[slot + 1 :]) for value in grid]
                run(candidates)
                best = candidates[0]
                for candidate in candidates[1:]:
                    if evaluated[candidate].beats(evaluated[best], objective):
                        best = candidate
                current = list(best)
                logger.debug("slot %d set to %d ms", slot + 1, current[slot])

    points = tuple(evaluated[key] for key in sorted(evaluated))
    result = SweepResult(points=points, objective=objective)
    logger.info("best schedule %s after %d launches", result.best.input, len(points))
    return result


def run_sweep(setup: LaunchSetup, spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Run the study `spec` describes."""
    match spec.variable:
        case "displacement":
            return sweep_displacement(setup, spec, workers)
        case _:
            return search_pulses(
                setup,
                spec.template,
                spec.grids,
                objective=spec.objective,
                budget=spec.budget,
                strategy=spec.strategy,
                workers=workers,
            )
