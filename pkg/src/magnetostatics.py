# Copyright (c) 2025 Matty Chalk
# Licensed under the MIT License (see LICENSE file for details)

"""Module defining the on-axis magnetostatics of current loops and layered solenoids.

Every field here is the axial component on the coil axis. Closed forms take the observation point
as an argument and are evaluated by translation, so x and the coil edge `L0` share one axis.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.integrate import quad

from errors import DomainError

if TYPE_CHECKING:
    from winding import LoopStack

logger = logging.getLogger(__name__)

MU_0 = 4e-7 * math.pi

# Upper bound on loop-point pairs evaluated in one numpy call.
_CHUNK = 2_000_000


@dataclass(frozen=True)
class FieldSample:
    """Axial field `B` (T) and its axial gradient `dBdx` (T/m) at position `x` (m)."""

    x: float
    B: float
    dBdx: float


@dataclass(frozen=True)
class LayerGeometry:
    """Geometry of a uniformly wound solenoid for the closed-form fields.

    Parameters
    ----------
    N : int
        Turns per layer (single and double layer), or total turns (multilayer).
    L : float
        Coil length (m).
    L0 : float
        Axial position of the coil's leftmost edge (m).
    R : float
        Winding radius of a single layer, inner layer of a double layer (m).
    Ro : float, optional
        Outer radius of a multilayer winding (m).
    Ri : float, optional
        Inner radius of a multilayer winding (m).
    d : float, optional
        Radial increment between the two layers of a double layer (m). Default is 0.
    """

    N: int
    L: float
    L0: float
    R: float
    Ro: float | None = None
    Ri: float | None = None
    d: float = 0.0

    def __post_init__(self) -> None:
        if isinstance(self.N, bool) or not isinstance(self.N, int):
            raise TypeError(f"N must be int, got {type(self.N).__name__}")
        if self.N < 0:
            raise ValueError(f"N must be greater than or equal to 0, got {self.N}")
        if self.L <= 0:
            raise ValueError(f"L must be greater than 0, got {self.L}")
        if self.R <= 0:
            raise ValueError(f"R must be greater than 0, got {self.R}")
        if self.d < 0:
            raise ValueError(f"d must be greater than or equal to 0, got {self.d}")
        for name in ("Ro", "Ri"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be greater than 0, got {value}")


def b_loop(I: float, R: float, x: float | np.ndarray) -> float | np.ndarray:
    """Return the axial field of one circular loop.

    Parameters
    ----------
    I : float
        Loop current (A).
    R : float or numpy.ndarray
        Loop radius (m).
    x : float or numpy.ndarray
        Axial offset of the observation point from the loop plane (m).

    Returns
    -------
    float or numpy.ndarray
        mu_0 I R^2 / (2 (x^2 + R^2)^(3/2)) in tesla.
    """
    if np.any(np.asarray(R) <= 0):
        raise ValueError(f"R must be greater than 0, got {R}")
    return MU_0 * I * R**2 / (2 * (x**2 + R**2) ** 1.5)


def db_loop_dx(I: float, R: float, x: float | np.ndarray) -> float | np.ndarray:
    """Return the axial derivative of `b_loop` with respect to the observation point (T/m)."""
    if np.any(np.asarray(R) <= 0):
        raise ValueError(f"R must be greater than 0, got {R}")
    return -3 * MU_0 * I * R**2 * x / (2 * (x**2 + R**2) ** 2.5)


def unit_field(stack: LoopStack, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return B and dB/dx of a stack carrying 1 A at each of the points `xs`.

    Parameters
    ----------
    stack : `LoopStack`
        The loops. Must not be empty.
    xs : numpy.ndarray
        Observation points (m).

    Returns
    -------
    tuple[numpy.ndarray, numpy.ndarray]
        Field (T) and gradient (T/m), one entry per point.
    """
    if len(stack) == 0:
        raise ValueError("stack must contain at least one loop")
    xs = np.asarray(xs, dtype=float).reshape(-1)
    b = np.empty(xs.size)
    dbdx = np.empty(xs.size)
    rows = max(1, _CHUNK // len(stack))
    r = stack.r[np.newaxis, :]
    for start in range(0, xs.size, rows):
        offsets = xs[start : start + rows, np.newaxis] - stack.x[np.newaxis, :]
        b[start : start + rows] = b_loop(1.0, r, offsets).sum(axis=1)
        dbdx[start : start + rows] = db_loop_dx(1.0, r, offsets).sum(axis=1)
    return b, dbdx


def b_superpose(stack: LoopStack, I: float, x: float) -> FieldSample:
    """Return the field of a loop stack by superposing every loop.

    The gradient is the sum of the analytic loop gradients.

    Parameters
    ----------
    stack : `LoopStack`
        The loops. Must not be empty.
    I : float
        Current through every loop (A).
    x : float
        Observation point (m).

    Returns
    -------
    `FieldSample`
        The field at `x`.
    """
    if len(stack) == 0:
        raise ValueError("stack must contain at least one loop")
    offsets = x - stack.x
    B = float(np.sum(b_loop(I, stack.r, offsets)))
    dBdx = float(np.sum(db_loop_dx(I, stack.r, offsets)))
    return FieldSample(x=x, B=B, dBdx=dBdx)


def field_profile(
    stack: LoopStack, I: float, x_min: float, x_max: float, step: float
) -> list[FieldSample]:
    """Return `b_superpose` sampled on the inclusive grid x_min, x_min + step, ..., x_max."""
    if step <= 0:
        raise ValueError(f"step must be greater than 0, got {step}")
    if x_max < x_min:
        raise ValueError(f"x_max must be at least x_min ({x_min}), got {x_max}")
    count = int(math.floor((x_max - x_min) / step + 1e-9)) + 1
    xs = x_min + np.arange(count) * step
    b, dbdx = unit_field(stack, xs)
    return [
        FieldSample(x=float(x), B=float(I * bi), dBdx=float(I * di))
        for x, bi, di in zip(xs, b, dbdx)
    ]


def _sheet_bracket(g: LayerGeometry, R: float, x: float) -> float:
    a = g.L0 - x
    return (a + g.L) / math.sqrt((a + g.L) ** 2 + R**2) - a / math.sqrt(a**2 + R**2)


def b_single_layer(g: LayerGeometry, I0: float, x: float) -> float:
    """Return the field of one layer of `g.N` turns spread uniformly over `g.L` at radius `g.R`.

    Parameters
    ----------
    g : `LayerGeometry`
        The coil.
    I0 : float
        Current (A).
    x : float
        Observation point (m).

    Returns
    -------
    float
        mu_0 N I0 / (2 L) [(a + L) / sqrt((a + L)^2 + R^2) - a / sqrt(a^2 + R^2)] with a = L0 - x.
    """
    return MU_0 * g.N * I0 / (2 * g.L) * _sheet_bracket(g, g.R, x)


def b_double_layer(g: LayerGeometry, I0: float, x: float) -> float:
    """Return the field of two layers of `g.N` turns at radii `g.R` and `g.R + g.d`."""
    return MU_0 * g.N * I0 / (2 * g.L) * (
        _sheet_bracket(g, g.R, x) + _sheet_bracket(g, g.R + g.d, x)
    )


def _check_multilayer(g: LayerGeometry) -> tuple[float, float]:
    if g.Ro is None or g.Ri is None:
        raise DomainError("multilayer geometry needs both Ro and Ri")
    if g.Ro <= g.Ri:
        raise DomainError(f"Ro must be greater than Ri ({g.Ri}), got {g.Ro}")
    return g.Ro, g.Ri


def b_multilayer(g: LayerGeometry, I0: float, x: float) -> float:
    """Return the field of `g.N` turns filling the rectangle [L0, L0 + L] x [Ri, Ro].

    The radial integral of the single-layer bracket has the antiderivative
    z ln(r + sqrt(z^2 + r^2)); the difference between the outer and inner radius is
    taken as z asinh((Ro^2 - Ri^2) / (Ro sqrt(z^2 + Ri^2) + Ri sqrt(z^2 + Ro^2))),
    which equals it exactly and stays accurate at z = 0 and as Ro approaches Ri.

    Parameters
    ----------
    g : `LayerGeometry`
        The coil. `g.Ro` must exceed `g.Ri`.
    I0 : float
        Current (A).
    x : float
        Observation point (m).

    Returns
    -------
    float
        The axial field (T).
    """
    Ro, Ri = _check_multilayer(g)

    def radial_term(z: float) -> float:
        return z * math.asinh(
            (Ro**2 - Ri**2) / (Ro * math.sqrt(z**2 + Ri**2) + Ri * math.sqrt(z**2 + Ro**2))
        )

    a = g.L0 - x
    coefficient = MU_0 * g.N * I0 / (2 * g.L * (Ro - Ri))
    return coefficient * (radial_term(a + g.L) - radial_term(a))


def multilayer_quadrature(g: LayerGeometry, I0: float, x: float) -> float:
    """Return `b_multilayer` by adaptive quadrature of the single-layer bracket over the radius."""
    Ro, Ri = _check_multilayer(g)
    integral, _ = quad(
        lambda r: _sheet_bracket(g, r, x), Ri, Ro, epsabs=0.0, epsrel=1e-13, limit=200
    )
    return MU_0 * g.N * I0 / (2 * g.L * (Ro - Ri)) * integral


@dataclass(frozen=True, eq=False)
class FieldTable:
    """Unit-current field of a stack sampled on a uniform grid.

    `sample` interpolates linearly inside the grid and falls back to `b_superpose` outside it.
    A table built with step 0 evaluates the superposition on every call.
    """

    stack: LoopStack
    x_min: float
    step: float
    b: list[float]
    dbdx: list[float]

    @classmethod
    def build(
        cls, stack: LoopStack, x_min: float, x_max: float, step: float = 5e-5
    ) -> FieldTable:
        """Sample the unit-current field of `stack` over [x_min, x_max].

        Parameters
        ----------
        stack : `LoopStack`
            The loops. Must not be empty.
        x_min, x_max : float
            Range of the table (m).
        step : float, optional
            Grid spacing (m). 0 disables the table. Default is 0.05 mm.

        Returns
        -------
        `FieldTable`
            The table.
        """
        if len(stack) == 0:
            raise ValueError("stack must contain at least one loop")
        if step < 0:
            raise ValueError(f"step must be greater than or equal to 0, got {step}")
        if step == 0:
            return cls(stack=stack, x_min=x_min, step=0.0, b=[], dbdx=[])
        if x_max <= x_min:
            raise ValueError(f"x_max must be greater than x_min ({x_min}), got {x_max}")

        count = int(math.ceil((x_max - x_min) / step)) + 1
        b, dbdx = unit_field(stack, x_min + np.arange(count) * step)
        logger.debug("built field table: %d points at %.3f mm", count, step * 1e3)
        return cls(stack=stack, x_min=x_min, step=step, b=b.tolist(), dbdx=dbdx.tolist())

    def sample(self, I: float, x: float) -> FieldSample:
        """Return the field at `x` for coil current `I`."""
        if self.step > 0:
            position = (x - self.x_min) / self.step
            index = math.floor(position)
            if 0 <= index < len(self.b) - 1:
                weight = position - index
                B = self.b[index] + weight * (self.b[index + 1] - self.b[index])
                dBdx = self.dbdx[index] + weight * (self.dbdx[index + 1] - self.dbdx[index])
                return FieldSample(x=x, B=I * B, dBdx=I * dBdx)
        return b_superpose(self.stack, I, x)
