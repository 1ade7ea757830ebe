# Copyright (c) 2025 Matty Chalk
# Licensed under the MIT License (see LICENSE file for details)

"""Module defining pulse schedules for the H-bridge and their text notation.

A schedule is written as whitespace-separated tokens such as "F5 B5 R4": a bridge state letter
(F)orward, (B)uffer or (R)everse followed by a duration in milliseconds.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from bridge_state import BridgeState
from errors import PulseParseError

MAX_TOTAL_MS = 200

_SEGMENT = re.compile(r"^([FBR])(\d+)$", re.IGNORECASE)
_SLOT = re.compile(r"^([FBR])(\d+|\?)$", re.IGNORECASE)


@dataclass(frozen=True)
class PulseSegment:
    """A bridge state held for a whole number of milliseconds."""

    state: BridgeState
    duration_ms: int

    def __post_init__(self) -> None:
        if not isinstance(self.state, BridgeState):
            raise TypeError(f"state must be BridgeState, got {type(self.state).__name__}")
        if isinstance(self.duration_ms, bool) or not isinstance(self.duration_ms, int):
            raise TypeError(f"duration_ms must be int, got {type(self.duration_ms).__name__}")
        if self.duration_ms < 1:
            raise ValueError(f"duration_ms must be at least 1, got {self.duration_ms}")

    def __str__(self) -> str:
        return f"{self.state.value}{self.duration_ms}"


@dataclass(frozen=True)
class PulseSchedule:
    """Ordered pulse segments, starting at t = 0.

    Parameters
    ----------
    segments : tuple[PulseSegment, ...]
        The segments. Must not be empty.
    max_total_ms : int, optional
        Longest total duration accepted. Default is `MAX_TOTAL_MS`.
    """

    segments: tuple[PulseSegment, ...]
    max_total_ms: int = field(default=MAX_TOTAL_MS, compare=False)

    def __post_init__(self) -> None:
        segments = tuple(self.segments)
        if not segments:
            raise ValueError("segments must not be empty")
        for segment in segments:
            if not isinstance(segment, PulseSegment):
                raise TypeError(f"segments must contain PulseSegment, got {type(segment).__name__}")
        total = sum(segment.duration_ms for segment in segments)
        if total > self.max_total_ms:
            raise ValueError(f"total duration must be at most {self.max_total_ms} ms, got {total} ms")
        object.__setattr__(self, "segments", segments)

    def __str__(self) -> str:
        return format_schedule(self)

    def __len__(self) -> int:
        return len(self.segments)


def _tokens(text: str) -> list[str]:
    if not isinstance(text, str):
        raise TypeError(f"text must be str, got {type(text).__name__}")
    return text.split()


def parse(text: str, max_total_ms: int = MAX_TOTAL_MS) -> PulseSchedule:
    """Parse a pulse profile such as "F5 B5 R5 B10 F5 B5 R4".

    Parameters
    ----------
    text : str
        The profile. Letters are case-insensitive.
    max_total_ms : int, optional
        Longest total duration accepted. Default is `MAX_TOTAL_MS`.

    Returns
    -------
    `PulseSchedule`
        The schedule, in token order.
    """
    tokens = _tokens(text)
    if not tokens:
        raise PulseParseError("empty pulse profile", 1)

    segments = []
    total = 0
    for index, token in enumerate(tokens, start=1):
        match = _SEGMENT.match(token)
        if match is None:
            if not token[0].isalpha():
                raise PulseParseError(f"expected a state letter before '{token}'", index)
            if token[0].upper() not in "FBR":
                raise PulseParseError(f"unknown state '{token[0]}' in '{token}'", index)
            raise PulseParseError(f"expected a positive whole number of ms in '{token}'", index)
        duration = int(match.group(2))
        if duration < 1:
            raise PulseParseError(f"duration must be at least 1 ms in '{token}'", index)
        total += duration
        if total > max_total_ms:
            raise PulseParseError(f"schedule exceeds {max_total_ms} ms at '{token}'", index)
        segments.append(PulseSegment(BridgeState(match.group(1).upper()), duration))

    return PulseSchedule(tuple(segments), max_total_ms=max_total_ms)


def format_schedule(schedule: PulseSchedule) -> str:
    """Return the canonical text of a schedule: uppercase tokens joined by single spaces."""
    return " ".join(str(segment) for segment in schedule.segments)


def total_ms(schedule: PulseSchedule) -> int:
    """Return the summed duration of a schedule in ms."""
    return sum(segment.duration_ms for segment in schedule.segments)


def segment_bounds(schedule: PulseSchedule) -> list[tuple[int, int, BridgeState]]:
    """Return (start_ms, end_ms, state) for every segment; each covers [start_ms, end_ms)."""
    bounds = []
    start = 0
    for segment in schedule.segments:
        bounds.append((start, start + segment.duration_ms, segment.state))
        start += segment.duration_ms
    return bounds


def polarity_at(schedule: PulseSchedule, t: float) -> BridgeState:
    """Return the bridge state at time `t`.

    Parameters
    ----------
    schedule : `PulseSchedule`
        The schedule.
    t : float
        Time since the start of the schedule (s).

    Returns
    -------
    `BridgeState`
        The state of the segment containing `t`, or BUFFER once the schedule has ended.
    """
    if t < 0:
        raise ValueError(f"t must be greater than or equal to 0, got {t}")
    # Rounded so that 5 ms computed as 0.005 lands on the boundary.
    t_ms = round(t * 1e3, 9)
    for start, end, state in segment_bounds(schedule):
        if start <= t_ms < end:
            return state
    return BridgeState.BUFFER


def flip_polarity(schedule: PulseSchedule) -> PulseSchedule:
    """Return the schedule with every Forward and Reverse segment swapped."""
    return PulseSchedule(
        tuple(PulseSegment(s.state.flipped(), s.duration_ms) for s in schedule.segments),
        max_total_ms=schedule.max_total_ms,
    )


def back_emf_estimate(L: float, dI: float, dt: float) -> float:
    """Return the magnitude of L dI/dt (V) for a current change `dI` (A) over `dt` (s)."""
    if dt <= 0:
        raise ValueError(f"dt must be greater than 0, got {dt}")
    return abs(L * dI / dt)


@dataclass(frozen=True)
class PulseTemplate:
    """A schedule shape whose "?" durations are filled in by a search.

    `slots` holds (state, duration_ms) pairs; a duration of None is a free slot.
    """

    slots: tuple[tuple[BridgeState, int | None], ...]

    @property
    def free_slots(self) -> int:
        """Number of durations a search must supply."""
        return sum(1 for _, duration in self.slots if duration is None)

    def __str__(self) -> str:
        return " ".join(
            f"{state.value}{'?' if duration is None else duration}" for state, duration in self.slots
        )


def parse_template(text: str) -> PulseTemplate:
    """Parse a template such as "F? B? R?" or "F5 B? R?".

    Parameters
    ----------
    text : str
        The template. Each token is a state letter followed by a duration or "?".

    Returns
    -------
    `PulseTemplate`
        The template. It has at least one free slot.
    """
    tokens = _tokens(text)
    if not tokens:
        raise PulseParseError("empty pulse template", 1)

    slots = []
    for index, token in enumerate(tokens, start=1):
        match = _SLOT.match(token)
        if match is None:
            raise PulseParseError(f"expected a state letter followed by ms or '?' in '{token}'", index)
        state = BridgeState(match.group(1).upper())
        if match.group(2) == "?":
            slots.append((state, None))
        else:
            duration = int(match.group(2))
            if duration < 1:
                raise PulseParseError(f"duration must be at least 1 ms in '{token}'", index)
            slots.append((state, duration))

    template = PulseTemplate(tuple(slots))
    if template.free_slots == 0:
        raise PulseParseError("template has no '?' slot", len(tokens))
    return template


def fill_template(
    template: PulseTemplate, durations: tuple[int, ...], max_total_ms: int = MAX_TOTAL_MS
) -> PulseSchedule:
    """Return the schedule obtained by putting `durations` into the free slots, in order."""
    durations = tuple(durations)
    if len(durations) != template.free_slots:
        raise ValueError(
            f"durations must have {template.free_slots} values, got {len(durations)}"
        )
    remaining = iter(durations)
    segments = tuple(
        PulseSegment(state, next(remaining) if duration is None else duration)
        for state, duration in template.slots
    )
    return PulseSchedule(segments, max_total_ms=max_total_ms)
