# Copyright (c) 2025 Matty Chalk
# Licensed under the MIT License (see LICENSE file for details)

"""Testing module for pulse.py."""

import pytest
from bridge_state import BridgeState
from errors import PulseParseError
from pulse import *

PUBLISHED_PROFILES = [
    "F50",
    "F10",
    "F32",
    "F14",
    "F18 B41 R18",
    "F14 B45 R14",
    "F14 B6 R14",
    "F5",
    "F10",
    "F10",
    "F5 B5 F5 B4 F4 B3 F2 B1 F2",
    "F5 B5 F5 B4 F4 B3 F2",
    "F5 B5 R5 B10 F5 B5 R4",
    "F5 B5 R4",
    "F9 B5 R5",
    "F9",
    "F5 B16 R3",
    "F5",
]


def test_parse_assignment():
    """Unit test parse assignment."""
    schedule = parse("F5 B5 R5 B10 F5 B5 R4")
    assert len(schedule) == 7
    assert [(s.state, s.duration_ms) for s in schedule.segments] == [
        (BridgeState.FORWARD, 5),
        (BridgeState.BUFFER, 5),
        (BridgeState.REVERSE, 5),
        (BridgeState.BUFFER, 10),
        (BridgeState.FORWARD, 5),
        (BridgeState.BUFFER, 5),
        (BridgeState.REVERSE, 4),
    ]
    assert parse("F10").segments == (PulseSegment(BridgeState.FORWARD, 10),)
    assert parse("  r3\tb2  ") == PulseSchedule(
        (PulseSegment(BridgeState.REVERSE, 3), PulseSegment(BridgeState.BUFFER, 2))
    )


def test_parse_needs_whitespace():
    """Unit test parse rejecting tokens written without spaces."""
    with pytest.raises(PulseParseError) as error:
        parse("F5B5")
    assert error.value.token_index == 1
    with pytest.raises(PulseParseError) as error:
        parse("F5 B5x")
    assert error.value.token_index == 2
    with pytest.raises(PulseParseError) as error:
        parse_template("F? B?R5")
    assert error.value.token_index == 2


def test_parse_errors():
    """Unit test parse error positions."""
    cases = {
        "": 1,
        "   ": 1,
        "F5 X3": 2,
        "F5 B0": 2,
        "F5 B-3": 2,
        "F": 1,
        "F5 B5 R": 3,
        "F5x": 1,
        "F5 B5 R5 B10F5": 4,
        "F5 7": 2,
        "F5.5": 1,
    }
    for text, index in cases.items():
        with pytest.raises(PulseParseError) as error:
            parse(text)
        assert error.value.token_index == index, text
        assert f"token {index}" in str(error.value)


def test_parse_type_validation():
    """Unit test parse type validation."""
    with pytest.raises(TypeError):
        parse(5)


def test_parse_total_limit():
    """Unit test parse against the total duration limit."""
    assert total_ms(parse("F100 B100")) == 200
    with pytest.raises(PulseParseError) as error:
        parse("F100 B100 R1")
    assert error.value.token_index == 3
    assert total_ms(parse("F100 B100 R1", max_total_ms=300)) == 201
    with pytest.raises(ValueError):
        PulseSchedule((PulseSegment(BridgeState.FORWARD, 201),))


def test_pulse_segment_validation():
    """Unit test PulseSegment validation."""
    with pytest.raises(TypeError):
        PulseSegment("F", 5)
    with pytest.raises(TypeError):
        PulseSegment(BridgeState.FORWARD, 5.0)
    with pytest.raises(ValueError):
        PulseSegment(BridgeState.FORWARD, 0)
    with pytest.raises(ValueError):
        PulseSchedule(())


def test_format_schedule():
    """Unit test format_schedule."""
    assert format_schedule(PulseSchedule((PulseSegment(BridgeState.FORWARD, 5),))) == "F5"
    assert format_schedule(parse("f5 b5")) == "F5 B5"
    assert str(parse("f5   b5\nr4")) == "F5 B5 R4"


def test_format_round_trip_published():
    """Unit test parse and format on every published profile."""
    for text in PUBLISHED_PROFILES:
        schedule = parse(text)
        assert format_schedule(schedule) == text
        assert parse(format_schedule(schedule)) == schedule


def test_segment_bounds():
    """Unit test segment_bounds and total_ms."""
    schedule = parse("F5 B5 R5")
    assert segment_bounds(schedule) == [
        (0, 5, BridgeState.FORWARD),
        (5, 10, BridgeState.BUFFER),
        (10, 15, BridgeState.REVERSE),
    ]
    assert total_ms(schedule) == 15


def test_polarity_at():
    """Unit test polarity_at lookups."""
    schedule = parse("F5 B5 R5")
    assert polarity_at(schedule, 0.0) == BridgeState.FORWARD
    assert polarity_at(schedule, 0.007) == BridgeState.BUFFER
    assert polarity_at(schedule, 0.004999) == BridgeState.FORWARD
    assert polarity_at(schedule, 0.005) == BridgeState.BUFFER
    assert polarity_at(schedule, 0.0149) == BridgeState.REVERSE
    assert polarity_at(schedule, 0.015) == BridgeState.BUFFER
    assert polarity_at(schedule, 1.0) == BridgeState.BUFFER
    with pytest.raises(ValueError):
        polarity_at(schedule, -0.001)


def test_polarity_at_scan():
    """Unit test polarity_at against the segment bounds on a 0.1 ms scan."""
    schedule = parse("F5 B5 R5 B10 F5 B5 R4")
    bounds = segment_bounds(schedule)
    for step in range(0, 450):
        t_ms = step / 10
        expected = BridgeState.BUFFER
        for start, end, state in bounds:
            if start <= t_ms < end:
                expected = state
        assert polarity_at(schedule, step * 1e-4) == expected, t_ms


def test_flip_polarity():
    """Unit test flip_polarity."""
    assert format_schedule(flip_polarity(parse("F5 B5 R4"))) == "R5 B5 F4"
    schedule = parse("F5 B5 F5 B4 F4 B3 F2 B1 F2")
    assert flip_polarity(flip_polarity(schedule)) == schedule


def test_back_emf_estimate():
    """Unit test back_emf_estimate."""
    assert back_emf_estimate(100e-6, 50.0, 0.1e-3) == pytest.approx(50.0)
    assert back_emf_estimate(100e-6, 0.0, 0.1e-3) == 0.0
    assert back_emf_estimate(36e-6, 75.0, 0.1e-3) == pytest.approx(27.0)
    assert back_emf_estimate(36e-6, -75.0, 0.1e-3) == pytest.approx(27.0)
    with pytest.raises(ValueError):
        back_emf_estimate(36e-6, 75.0, 0.0)


def test_parse_template():
    """Unit test parse_template."""
    template = parse_template("F? B? R?")
    assert template.free_slots == 3
    assert str(template) == "F? B? R?"
    assert parse_template("f5 b?").slots == ((BridgeState.FORWARD, 5), (BridgeState.BUFFER, None))
    with pytest.raises(PulseParseError):
        parse_template("F5 B5")
    with pytest.raises(PulseParseError) as error:
        parse_template("F? Q?")
    assert error.value.token_index == 2
    with pytest.raises(PulseParseError):
        parse_template("")


def test_fill_template():
    """Unit test fill_template."""
    template = parse_template("F? B5 R?")
    assert format_schedule(fill_template(template, (10, 20))) == "F10 B5 R20"
    with pytest.raises(ValueError):
        fill_template(template, (10,))
    with pytest.raises(ValueError):
        fill_template(template, (150, 100))
