# Copyright (c) 2025 Matty Chalk
# Licensed under the MIT License (see LICENSE file for details)

"""Testing module for magnetostatics.py."""

import math

import numpy as np
import pytest
from errors import DomainError
from magnetostatics import *
from winding import DEFAULT_TUBE, DEFAULT_WIRE, LoopStack, Section, WindingProfile, digitize, preset


def _short_coil(layers: int, turns: int = 100) -> tuple[LoopStack, LayerGeometry]:
    extent = turns * DEFAULT_WIRE.pitch
    stack = digitize(WindingProfile("short", (Section(extent, layers),)))
    geometry = LayerGeometry(
        N=turns,
        L=extent,
        L0=0.0,
        R=DEFAULT_TUBE.innermost_radius(DEFAULT_WIRE),
        d=DEFAULT_WIRE.bare_diameter,
    )
    return stack, geometry


def test_b_loop_centre():
    """Unit test b_loop at the loop plane."""
    assert b_loop(1.0, 5e-3, 0.0) == pytest.approx(MU_0 / (2 * 5e-3))
    assert b_loop(1.0, 5e-3, 0.0) == pytest.approx(1.2566e-4, rel=1e-4)


def test_b_loop_linearity_and_parity():
    """Unit test b_loop linearity in current and parity in x."""
    assert b_loop(0.0, 5e-3, 0.01) == 0.0
    assert b_loop(-2.0, 5e-3, 0.01) == -2.0 * b_loop(1.0, 5e-3, 0.01)
    assert b_loop(1.0, 5e-3, -0.003) == b_loop(1.0, 5e-3, 0.003)


def test_b_loop_far_field():
    """Unit test b_loop against the dipole far field."""
    R = 5e-3
    x = 10 * R
    dipole = MU_0 * R**2 / (2 * x**3)
    assert abs(b_loop(1.0, R, x) - dipole) <= 0.015 * dipole


def test_b_loop_biot_savart():
    """Unit test b_loop against a numerical Biot-Savart sum around the loop."""
    R, x, segments = 5e-3, 2e-3, 2000
    theta = np.linspace(0.0, 2 * np.pi, segments, endpoint=False)
    dl = np.stack([-np.sin(theta), np.cos(theta), np.zeros(segments)], axis=1) * R * 2 * np.pi / segments
    position = np.stack([R * np.cos(theta), R * np.sin(theta), np.zeros(segments)], axis=1)
    separation = np.array([0.0, 0.0, x]) - position
    distance = np.linalg.norm(separation, axis=1)[:, np.newaxis]
    field = MU_0 / (4 * np.pi) * np.sum(np.cross(dl, separation) / distance**3, axis=0)
    assert b_loop(1.0, R, x) == pytest.approx(field[2], rel=1e-9)


def test_b_loop_value_validation():
    """Unit test b_loop value validation."""
    with pytest.raises(ValueError):
        b_loop(1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        db_loop_dx(1.0, -1.0, 0.0)


def test_db_loop_dx_finite_difference():
    """Unit test db_loop_dx against central differences of b_loop."""
    h = 1e-5
    for x in (-0.02, -0.004, 0.001, 0.007, 0.03):
        numeric = (b_loop(3.0, 5e-3, x + h) - b_loop(3.0, 5e-3, x - h)) / (2 * h)
        assert db_loop_dx(3.0, 5e-3, x) == pytest.approx(numeric, rel=1e-4)


def test_b_superpose_single_loop():
    """Unit test b_superpose on a one-loop stack."""
    stack = LoopStack(x=[0.01], r=[4e-3])
    sample = b_superpose(stack, 2.0, 0.013)
    assert sample.x == 0.013
    assert sample.B == pytest.approx(b_loop(2.0, 4e-3, 0.003))
    assert sample.dBdx == pytest.approx(db_loop_dx(2.0, 4e-3, 0.003))


def test_b_superpose_empty_stack():
    """Unit test b_superpose on an empty stack."""
    with pytest.raises(ValueError):
        b_superpose(LoopStack(x=[], r=[]), 1.0, 0.0)


def test_b_superpose_long_solenoid_limit():
    """Unit test b_superpose inside the 523-loop stack."""
    stack = digitize(preset("single"))
    expected = MU_0 * 523 * 1.0 / 0.3556
    assert expected == pytest.approx(1.848e-3, rel=1e-3)
    for x in (0.05, 0.1, 0.1778, 0.25, 0.3):
        assert b_superpose(stack, 1.0, x).B == pytest.approx(expected, rel=0.01)


def test_b_superpose_symmetry():
    """Unit test b_superpose parity about the centre of a symmetric stack."""
    stack, geometry = _short_coil(layers=2)
    centre = geometry.L / 2
    assert abs(b_superpose(stack, 1.0, centre).dBdx) < 1e-9
    for delta in (0.001, 0.02, 0.05):
        ahead = b_superpose(stack, 1.0, centre + delta)
        behind = b_superpose(stack, 1.0, centre - delta)
        assert ahead.B == pytest.approx(behind.B, rel=1e-9)
        assert ahead.dBdx == pytest.approx(-behind.dBdx, rel=1e-9)


def test_b_superpose_gradient_matches_finite_difference():
    """Unit test b_superpose gradient against central differences of B."""
    stack, _ = _short_coil(layers=1, turns=40)
    h = 1e-5
    for x in np.linspace(-0.03, 0.06, 37):
        numeric = (b_superpose(stack, 1.0, x + h).B - b_superpose(stack, 1.0, x - h).B) / (2 * h)
        analytic = b_superpose(stack, 1.0, x).dBdx
        assert analytic == pytest.approx(numeric, rel=1e-4, abs=1e-9)


def test_b_superpose_linearity():
    """Unit test b_superpose scaling with current."""
    stack, _ = _short_coil(layers=1)
    unit = b_superpose(stack, 1.0, 0.012)
    doubled = b_superpose(stack, 2.0, 0.012)
    negated = b_superpose(stack, -1.0, 0.012)
    assert doubled.B == 2 * unit.B
    assert negated.B == -unit.B
    assert negated.dBdx == -unit.dBdx


def test_b_single_layer_long_solenoid():
    """Unit test b_single_layer at the centre of a long coil."""
    geometry = LayerGeometry(N=1000, L=0.5, L0=0.0, R=5e-3)
    assert b_single_layer(geometry, 2.0, 0.25) == pytest.approx(MU_0 * 1000 * 2.0 / 0.5, rel=0.01)
    assert b_single_layer(geometry, 0.0, 0.25) == 0.0


def test_b_single_layer_matches_superposition():
    """Unit test b_single_layer against the digitized single layer."""
    stack, geometry = _short_coil(layers=1)
    pitch = DEFAULT_WIRE.pitch
    for x in np.concatenate(
        [np.linspace(-0.02, -pitch, 10), np.linspace(pitch, geometry.L - pitch, 30), np.linspace(geometry.L + pitch, geometry.L + 0.02, 10)]
    ):
        expected = b_superpose(stack, 1.5, x).B
        assert b_single_layer(geometry, 1.5, x) == pytest.approx(expected, rel=0.01)


def test_b_double_layer_definition():
    """Unit test b_double_layer against two single layers."""
    geometry = LayerGeometry(N=50, L=0.03, L0=0.01, R=4e-3, d=0.65e-3)
    outer = LayerGeometry(N=50, L=0.03, L0=0.01, R=4.65e-3)
    for x in (0.0, 0.015, 0.025, 0.05):
        assert b_double_layer(geometry, 1.0, x) == pytest.approx(
            b_single_layer(geometry, 1.0, x) + b_single_layer(outer, 1.0, x)
        )
    flat = LayerGeometry(N=50, L=0.03, L0=0.01, R=4e-3, d=0.0)
    assert b_double_layer(flat, 1.0, 0.02) == pytest.approx(2 * b_single_layer(flat, 1.0, 0.02))


def test_b_double_layer_matches_superposition():
    """Unit test b_double_layer against the digitized double layer."""
    stack, geometry = _short_coil(layers=2)
    pitch = DEFAULT_WIRE.pitch
    for x in np.concatenate(
        [np.linspace(-0.02, -pitch, 10), np.linspace(pitch, geometry.L - pitch, 30), np.linspace(geometry.L + pitch, geometry.L + 0.02, 10)]
    ):
        expected = b_superpose(stack, 1.0, x).B
        assert b_double_layer(geometry, 1.0, x) == pytest.approx(expected, rel=0.01)


def test_b_multilayer_matches_quadrature():
    """Unit test b_multilayer against adaptive quadrature on a 100-point grid."""
    count = 0
    for Ri in (4e-3, 5e-3, 6e-3, 8e-3):
        for thickness in (0.65e-3, 2e-3, 5e-3, 10e-3, 20e-3):
            geometry = LayerGeometry(N=300, L=0.05, L0=0.0, R=Ri, Ri=Ri, Ro=Ri + thickness)
            for x in (-0.01, 0.0, 0.0125, 0.025, 0.06):
                assert b_multilayer(geometry, 1.0, x) == pytest.approx(
                    multilayer_quadrature(geometry, 1.0, x), rel=1e-9
                )
                count += 1
    assert count == 100


def test_b_multilayer_thin_limit():
    """Unit test b_multilayer converging to a single layer as Ro approaches Ri."""
    Ri = 4.3e-3
    thin = LayerGeometry(N=200, L=0.08, L0=0.0, R=Ri, Ri=Ri, Ro=Ri * (1 + 1e-5))
    for x in (-0.01, 0.0, 0.04, 0.09):
        single = b_single_layer(thin, 1.0, x)
        assert abs(b_multilayer(thin, 1.0, x) - single) < 1e-4 * abs(single)


def test_b_multilayer_domain_error():
    """Unit test b_multilayer outside its domain."""
    with pytest.raises(DomainError):
        b_multilayer(LayerGeometry(N=10, L=0.01, L0=0.0, R=4e-3, Ri=5e-3, Ro=5e-3), 1.0, 0.0)
    with pytest.raises(DomainError):
        b_multilayer(LayerGeometry(N=10, L=0.01, L0=0.0, R=4e-3, Ri=6e-3, Ro=5e-3), 1.0, 0.0)
    with pytest.raises(DomainError):
        b_multilayer(LayerGeometry(N=10, L=0.01, L0=0.0, R=4e-3), 1.0, 0.0)
    geometry = LayerGeometry(N=10, L=0.01, L0=0.0, R=4e-3, Ri=4e-3, Ro=9e-3)
    assert b_multilayer(geometry, 0.0, 0.005) == 0.0


def test_layer_geometry_validation():
    """Unit test LayerGeometry validation."""
    with pytest.raises(TypeError):
        LayerGeometry(N=1.5, L=0.01, L0=0.0, R=4e-3)
    with pytest.raises(ValueError):
        LayerGeometry(N=10, L=0.0, L0=0.0, R=4e-3)
    with pytest.raises(ValueError):
        LayerGeometry(N=10, L=0.01, L0=0.0, R=-4e-3)
    with pytest.raises(ValueError):
        LayerGeometry(N=10, L=0.01, L0=0.0, R=4e-3, Ri=-1e-3, Ro=5e-3)


def test_field_profile_grid():
    """Unit test field_profile sampling."""
    stack, _ = _short_coil(layers=1, turns=20)
    samples = field_profile(stack, 2.0, -0.01, 0.01, 0.0005)
    assert len(samples) == 41
    assert samples[0].x == pytest.approx(-0.01)
    assert samples[-1].x == pytest.approx(0.01)
    for sample in samples[::10]:
        exact = b_superpose(stack, 2.0, sample.x)
        assert sample.B == pytest.approx(exact.B, rel=1e-12)
        assert sample.dBdx == pytest.approx(exact.dBdx, rel=1e-12, abs=1e-15)
    with pytest.raises(ValueError):
        field_profile(stack, 1.0, 0.0, 0.01, 0.0)


def test_field_table_sample():
    """Unit test FieldTable interpolation and fallback."""
    stack, _ = _short_coil(layers=1, turns=60)
    table = FieldTable.build(stack, -0.05, 0.1, step=5e-5)
    for x in (-0.03, -0.001, 0.0103, 0.02, 0.045, 0.07):
        exact = b_superpose(stack, 40.0, x)
        sample = table.sample(40.0, x)
        assert sample.B == pytest.approx(exact.B, rel=1e-4)
        assert sample.dBdx == pytest.approx(exact.dBdx, rel=1e-3, abs=1e-3)

    outside = table.sample(40.0, 0.2)
    assert outside.B == pytest.approx(b_superpose(stack, 40.0, 0.2).B)

    exact_table = FieldTable.build(stack, 0.0, 0.0, step=0.0)
    assert exact_table.sample(1.0, 0.01) == b_superpose(stack, 1.0, 0.01)


def test_field_table_validation():
    """Unit test FieldTable.build validation."""
    stack, _ = _short_coil(layers=1, turns=5)
    with pytest.raises(ValueError):
        FieldTable.build(LoopStack(x=[], r=[]), 0.0, 0.1)
    with pytest.raises(ValueError):
        FieldTable.build(stack, 0.0, 0.1, step=-1.0)
    with pytest.raises(ValueError):
        FieldTable.build(stack, 0.1, 0.0)
