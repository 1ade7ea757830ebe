# Copyright (c) 2025 Matty Chalk
# Licensed under the MIT License (see LICENSE file for details)

"""Module defining coil winding profiles, their digitization into coaxial current loops,
and lumped electrical estimates for the resulting coil."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ellipe, ellipk

from errors import ConfigError, GeometryError, UnknownPresetError
from magnetostatics import MU_0

logger = logging.getLogger(__name__)

INCH = 0.0254

# Profiles may overrun the tube by this much (m) before digitize rejects them.
LENGTH_TOLERANCE = 1e-6


def _check_positive(name: str, value: float) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError(f"{name} must be float, got {type(value).__name__}")
    if not math.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be greater than 0, got {value}")


@dataclass(frozen=True)
class WireSpec:
    """Magnet wire used to wind a coil.

    Parameters
    ----------
    bare_diameter : float
        Copper diameter (m). Also the radial increment between layers.
    pitch : float
        Axial centre-to-centre spacing of adjacent turns (m).
    resistance_per_length : float
        Resistance of the wire (ohm/m).
    """

    bare_diameter: float
    pitch: float
    resistance_per_length: float

    def __post_init__(self) -> None:
        _check_positive("bare_diameter", self.bare_diameter)
        _check_positive("pitch", self.pitch)
        _check_positive("resistance_per_length", self.resistance_per_length)
        if self.pitch < self.bare_diameter:
            raise ValueError(
                f"pitch must be at least bare_diameter ({self.bare_diameter}), got {self.pitch}"
            )

    @property
    def radius(self) -> float:
        """Radius of the bare copper (m)."""
        return self.bare_diameter / 2


@dataclass(frozen=True)
class TubeSpec:
    """Former the coil is wound on.

    Parameters
    ----------
    length : float
        Length of the tube (m).
    outer_radius : float
        Outer radius of the tube (m).
    """

    length: float
    outer_radius: float

    def __post_init__(self) -> None:
        _check_positive("length", self.length)
        _check_positive("outer_radius", self.outer_radius)
        if self.length <= self.outer_radius:
            raise ValueError(
                f"length must be greater than outer_radius ({self.outer_radius}), got {self.length}"
            )

    def innermost_radius(self, wire: WireSpec) -> float:
        """Return the radius of the first winding layer (m)."""
        return self.outer_radius + wire.bare_diameter / 2


# 22 AWG enamelled copper on a 14 inch tube of 7.9 mm outer diameter.
DEFAULT_WIRE = WireSpec(
    bare_diameter=0.0256 * INCH, pitch=0.68e-3, resistance_per_length=0.05296
)
DEFAULT_TUBE = TubeSpec(length=14 * INCH, outer_radius=7.9e-3 / 2)


@dataclass(frozen=True)
class Section:
    """An axial stretch of winding with a constant number of layers.

    A `layer_count` of 0 encodes a gap.
    """

    axial_extent: float
    layer_count: int

    def __post_init__(self) -> None:
        _check_positive("axial_extent", self.axial_extent)
        if isinstance(self.layer_count, bool) or not isinstance(self.layer_count, int):
            raise TypeError(
                f"layer_count must be int, got {type(self.layer_count).__name__}"
            )
        if self.layer_count < 0:
            raise ValueError(
                f"layer_count must be greater than or equal to 0, got {self.layer_count}"
            )


@dataclass(frozen=True)
class WindingProfile:
    """Ordered sections of a coil, starting at the tube entrance.

    Parameters
    ----------
    name : str
        Name of the profile.
    sections : tuple[Section, ...]
        Sections from the tube entrance onwards.
    notes : str, optional
        Free-text record of geometry assumptions. Not part of equality or serialization.
    """

    name: str
    sections: tuple[Section, ...]
    notes: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if not isinstance(self.name, str):
            raise TypeError(f"name must be str, got {type(self.name).__name__}")
        sections = tuple(self.sections)
        if not sections:
            raise ValueError("sections must not be empty")
        for section in sections:
            if not isinstance(section, Section):
                raise TypeError(
                    f"sections must contain Section, got {type(section).__name__}"
                )
        object.__setattr__(self, "sections", sections)

    @property
    def total_extent(self) -> float:
        """Sum of the section lengths (m)."""
        return math.fsum(section.axial_extent for section in self.sections)

    @property
    def is_wound(self) -> bool:
        """True when at least one section carries a layer."""
        return any(section.layer_count > 0 for section in self.sections)


@dataclass(frozen=True, eq=False)
class LoopStack:
    """Discrete coaxial current loops approximating a coil.

    Loops are ordered by axial position, then radius.

    Parameters
    ----------
    x : numpy.ndarray
        Axial position of each loop (m).
    r : numpy.ndarray
        Radius of each loop (m).
    """

    x: np.ndarray
    r: np.ndarray

    def __post_init__(self) -> None:
        x = np.array(self.x, dtype=float).reshape(-1)
        r = np.array(self.r, dtype=float).reshape(-1)
        if x.shape != r.shape:
            raise ValueError(
                f"x and r must have the same length, got {x.size} and {r.size}"
            )
        if np.any(r <= 0):
            raise ValueError("every loop radius must be greater than 0")
        x.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "r", r)

    def __len__(self) -> int:
        return int(self.x.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LoopStack):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.r, other.r)

    @property
    def loops(self) -> list[tuple[float, float]]:
        """The loops as a list of (x, r) tuples."""
        return list(zip(self.x.tolist(), self.r.tolist()))

    def serialize(self) -> str:
        """Return a byte-stable text form, one "x,r" line per loop in metres."""
        return "".join(f"{x!r},{r!r}\n" for x, r in self.loops)

    def mirrored(self, about: float) -> LoopStack:
        """Return the stack reflected through the plane x = `about`."""
        return LoopStack(x=(2 * about - self.x)[::-1], r=self.r[::-1])


@dataclass(frozen=True)
class CoilElectrical:
    """Lumped inductance (H) and resistance (ohm) of a coil."""

    inductance: float
    resistance: float

    def __post_init__(self) -> None:
        _check_positive("inductance", self.inductance)
        _check_positive("resistance", self.resistance)


def turns_per_layer(axial_extent: float, pitch: float) -> int:
    """Return how many turns of one layer fit in a section.

    A turn counts when at least half of its pitch lies inside the section.

    Parameters
    ----------
    axial_extent : float
        Length of the section (m).
    pitch : float
        Axial spacing of the turns (m).

    Returns
    -------
    int
        The number of turns.
    """
    return int(math.floor(axial_extent / pitch + 0.5))


def digitize(
    profile: WindingProfile,
    wire: WireSpec = DEFAULT_WIRE,
    tube: TubeSpec = DEFAULT_TUBE,
) -> LoopStack:
    """Return one current loop per turn of the winding profile.

    Layer k of every section has radius `tube.outer_radius + wire.bare_diameter / 2 + k * wire.bare_diameter`.
    Turn centres sit at `section_start + (i + 1/2) * wire.pitch`.

    Parameters
    ----------
    profile : `WindingProfile`
        The profile to digitize.
    wire : `WireSpec`, optional
        The wire. Default is `DEFAULT_WIRE`.
    tube : `TubeSpec`, optional
        The former. Default is `DEFAULT_TUBE`.

    Returns
    -------
    `LoopStack`
        The loops, ordered by (x, r). Empty when the profile is all gaps.
    """
    if profile.total_extent > tube.length + LENGTH_TOLERANCE:
        raise GeometryError(
            f"profile '{profile.name}' spans {profile.total_extent * 1e3:.3f} mm, "
            f"longer than the {tube.length * 1e3:.3f} mm tube"
        )

    innermost = tube.innermost_radius(wire)
    xs: list[np.ndarray] = []
    rs: list[np.ndarray] = []
    start = 0.0
    for section in profile.sections:
        turns = turns_per_layer(section.axial_extent, wire.pitch)
        centres = start + (np.arange(turns) + 0.5) * wire.pitch
        for layer in range(section.layer_count):
            xs.append(centres)
            rs.append(np.full(turns, innermost + layer * wire.bare_diameter))
        start += section.axial_extent

    if not xs:
        return LoopStack(x=np.empty(0), r=np.empty(0))

    x = np.concatenate(xs)
    r = np.concatenate(rs)
    order = np.lexsort((r, x))
    stack = LoopStack(x=x[order], r=r[order])
    logger.debug("digitized '%s' into %d loops", profile.name, len(stack))
    return stack


def loop_self_inductance(r: np.ndarray | float, wire_radius: float) -> np.ndarray:
    """Return the self-inductance (H) of circular loops of wire.

    Uses mu_0 * r * (ln(8 r / a) - 2) for a loop of radius r made of wire of radius a.
    """
    r = np.asarray(r, dtype=float)
    return MU_0 * r * (np.log(8 * r / wire_radius) - 2)


def mutual_inductance(
    r1: np.ndarray | float, r2: np.ndarray | float, d: np.ndarray | float
) -> np.ndarray:
    """Return the mutual inductance (H) of coaxial circular loops.

    Parameters
    ----------
    r1, r2 : numpy.ndarray or float
        Loop radii (m).
    d : numpy.ndarray or float
        Axial separation of the loop planes (m).

    Returns
    -------
    numpy.ndarray
        mu_0 sqrt(r1 r2) ((2/k - k) K(k^2) - (2/k) E(k^2)), k^2 = 4 r1 r2 / ((r1 + r2)^2 + d^2).
    """
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    d = np.asarray(d, dtype=float)
    m = 4 * r1 * r2 / ((r1 + r2) ** 2 + d**2)
    k = np.sqrt(m)
    return MU_0 * np.sqrt(r1 * r2) * ((2 / k - k) * ellipk(m) - 2 / k * ellipe(m))


def estimate_electrical(stack: LoopStack, wire: WireSpec = DEFAULT_WIRE) -> CoilElectrical:
    """Return the lumped inductance and resistance of a digitized coil.

    Resistance is the total wire length times the wire resistance per metre.
    Inductance is the sum of every loop's self-inductance plus the mutual inductance of every loop pair.

    Parameters
    ----------
    stack : `LoopStack`
        The coil's loops. Must not be empty.
    wire : `WireSpec`, optional
        The wire the coil is wound with. Default is `DEFAULT_WIRE`.

    Returns
    -------
    `CoilElectrical`
        The estimate.
    """
    if len(stack) == 0:
        raise ValueError("stack must contain at least one loop")

    wire_length = float(np.sum(2 * np.pi * stack.r))
    resistance = wire_length * wire.resistance_per_length

    inductance = float(np.sum(loop_self_inductance(stack.r, wire.radius)))
    mutual = 0.0
    # One row of the pair matrix at a time keeps memory linear in the loop count.
    for i in range(len(stack) - 1):
        mutual += float(
            np.sum(mutual_inductance(stack.r[i], stack.r[i + 1 :], stack.x[i + 1 :] - stack.x[i]))
        )
    inductance += 2 * mutual

    logger.debug(
        "estimated %d loops: %.1f m of wire, L = %.2f uH, R = %.3f ohm",
        len(stack),
        wire_length,
        inductance * 1e6,
        resistance,
    )
    return CoilElectrical(inductance=inductance, resistance=resistance)


PRESET_NAMES = (
    "single",
    "double",
    "dual-9-5-1-5-9",
    "exponential",
    "t-shape",
    "linear-accelerator",
)

# Inductance and resistance measured on the built coils.
MEASURED_ELECTRICAL = {
    "single": CoilElectrical(inductance=34.2e-6, resistance=0.5),
    "double": CoilElectrical(inductance=61.9e-6, resistance=0.6),
    "dual-9-5-1-5-9": CoilElectrical(inductance=94.9e-6, resistance=0.6),
    "exponential": CoilElectrical(inductance=127.6e-6, resistance=0.7),
    "t-shape": CoilElectrical(inductance=147.4e-6, resistance=0.6),
    "linear-accelerator": CoilElectrical(inductance=49.5e-6, resistance=0.7),
}

# Presets whose estimated inductance falls outside +/-35 % of the measured value, and why.
# The built coils each used about 10 m of wire; the presets fill the geometry they describe.
INDUCTANCE_DEVIATIONS = {
    "single": "523 turns over the full 14 inch tube need about 14 m of wire; "
    "a full-length current sheet of that size is near 55 uH.",
    "double": "two full-length layers (1046 turns, about 30 m of wire) quadruple "
    "the single-layer inductance instead of doubling it.",
    "dual-9-5-1-5-9": "each group is assumed to span 40 % of the tube, so the 9-layer "
    "sections alone hold over 300 turns each; the built coil was far shorter.",
    "exponential": "equal sections over the full tube put nearly 700 turns in the "
    "8-layer section alone.",
    "t-shape": "a 30-layer section over 20 % of the tube holds over 3000 turns; "
    "the built coil's section lengths are not given.",
    "linear-accelerator": "five double-layer sections of one ninth of the tube "
    "each hold 116 turns; the built coil's gaps and sections are not dimensioned.",
}

PRESET_NOTES = {
    "single": "one layer over the full tube length",
    "double": "two layers over the full tube length",
    "dual-9-5-1-5-9": "two groups of six equal sections (9,5,1,1,5,9 layers), each group "
    "40 % of the tube, separated by a gap of 20 % of the tube (assumed lengths)",
    "exponential": "stepped approximation (8,6,4,3,2,1 layers) over six equal sections "
    "covering the tube (assumed; no function is given)",
    "t-shape": "30 layers over 20 %, 4 layers over 70 %, 1 layer over 10 % of the tube "
    "(assumed lengths)",
    "linear-accelerator": "five double-layer sections separated by four gaps, all nine "
    "pieces equal, covering the tube (assumed lengths)",
}


def preset(name: str, tube_length: float = DEFAULT_TUBE.length) -> WindingProfile:
    """Return one of the documented winding presets.

    Parameters
    ----------
    name : str
        One of `PRESET_NAMES`.
    tube_length : float, optional
        Length of the tube the preset is laid out on (m). Default is the 14 inch tube.

    Returns
    -------
    `WindingProfile`
        The preset. Its `notes` record the assumed section lengths.
    """
    if not isinstance(name, str):
        raise TypeError(f"name must be str, got {type(name).__name__}")
    _check_positive("tube_length", tube_length)
    key = name.strip().lower()

    match key:
        case "single":
            layout = [(1.0, 1)]
        case "double":
            layout = [(1.0, 2)]
        case "dual-9-5-1-5-9":
            group = [(0.4 / 6, layers) for layers in (9, 5, 1, 1, 5, 9)]
            layout = group + [(0.2, 0)] + group
        case "exponential":
            layout = [(1 / 6, layers) for layers in (8, 6, 4, 3, 2, 1)]
        case "t-shape":
            layout = [(0.2, 30), (0.7, 4), (0.1, 1)]
        case "linear-accelerator":
            layout = [(1 / 9, 0 if index % 2 else 2) for index in range(9)]
        case _:
            raise UnknownPresetError(
                f"unknown preset '{name}', expected one of {', '.join(PRESET_NAMES)}"
            )

    sections = tuple(Section(fraction * tube_length, layers) for fraction, layers in layout)
    return WindingProfile(name=key, sections=sections, notes=PRESET_NOTES[key])


def profile_to_dict(profile: WindingProfile) -> dict:
    """Return the structured-text form of a profile: name and sections in mm."""
    return {
        "name": profile.name,
        "sections": [
            {
                "length_mm": float(f"{section.axial_extent * 1e3:.12g}"),
                "layers": section.layer_count,
            }
            for section in profile.sections
        ],
    }


def profile_from_dict(data: dict) -> WindingProfile:
    """Build a profile from its structured-text form.

    Parameters
    ----------
    data : dict
        Mapping with exactly the keys `name` and `sections`; each section has exactly `length_mm` and `layers`.

    Returns
    -------
    `WindingProfile`
        The profile.
    """
    if not isinstance(data, dict):
        raise ConfigError(f"profile must be a mapping, got {type(data).__name__}")
    unknown = set(data) - {"name", "sections"}
    if unknown:
        raise ConfigError(f"unknown profile key(s): {', '.join(sorted(map(str, unknown)))}")
    for key in ("name", "sections"):
        if key not in data:
            raise ConfigError(f"profile is missing required field '{key}'")
    if not isinstance(data["sections"], list) or not data["sections"]:
        raise ConfigError("profile.sections must be a non-empty list")

    sections = []
    for index, entry in enumerate(data["sections"]):
        where = f"profile.sections[{index}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where} must be a mapping")
        unknown = set(entry) - {"length_mm", "layers"}
        if unknown:
            raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(map(str, unknown)))}")
        for key in ("length_mm", "layers"):
            if key not in entry:
                raise ConfigError(f"{where} is missing required field '{key}'")
        try:
            sections.append(Section(float(entry["length_mm"]) * 1e-3, entry["layers"]))
        except (TypeError, ValueError) as error:
            raise ConfigError(f"{where}: {error}") from error

    return WindingProfile(name=str(data["name"]), sections=tuple(sections))
