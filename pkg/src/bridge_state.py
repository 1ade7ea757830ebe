# Copyright (c) 2025 Matty Chalk
# Licensed under the MIT License (see LICENSE file for details)

"""Module defining the BridgeState enum for the H-bridge switch states."""

from __future__ import annotations
from enum import Enum


class BridgeState(Enum):
    """Enumeration of the H-bridge states.

    Members
    -------
    FORWARD : str = "F"
        SSR1 and SSR2 conduct.
    BUFFER : str = "B"
        All four switches open; any coil current flows through the flyback diodes.
    REVERSE : str = "R"
        SSR3 and SSR4 conduct.
    """

    FORWARD = "F"
    BUFFER = "B"
    REVERSE = "R"

    def flipped(self) -> BridgeState:
        """Return the `BridgeState` with the opposite current direction.

        Returns
        -------
        `BridgeState`
            REVERSE for FORWARD, FORWARD for REVERSE, BUFFER for BUFFER.
        """
        match self:
            case BridgeState.FORWARD:
                return BridgeState.REVERSE
            case BridgeState.REVERSE:
                return BridgeState.FORWARD
            case BridgeState.BUFFER:
                return BridgeState.BUFFER

    def __int__(self) -> int:
        """Return the polarity the `BridgeState` applies to the coil.

        FORWARD -> +1,
        BUFFER -> 0,
        REVERSE -> -1.

        Returns
        -------
        int
            The polarity of the `BridgeState`.
        """
        match self:
            case BridgeState.FORWARD:
                return 1
            case BridgeState.BUFFER:
                return 0
            case BridgeState.REVERSE:
                return -1
