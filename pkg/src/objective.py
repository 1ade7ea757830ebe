# Copyright (c) 2025 Matty Chalk
# Licensed under the MIT License (see LICENSE file for details)

"""Module defining the Objective enum for parameter searches."""

from enum import Enum


class Objective(Enum):
    """Enumeration of the quantities a sweep can maximise.

    Members
    -------
    VELOCITY : str = "velocity"
    EFFICIENCY : str = "efficiency"
    """

    VELOCITY = "velocity"
    EFFICIENCY = "efficiency"

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Objective):
            return self.value == other.value
        if isinstance(other, str):
            return self.value == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.value)
