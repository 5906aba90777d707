"""Checkpointing protocols pluggable into the simulation kernel."""

from .base import (
    DISCARD,
    FORCE,
    PROCESS,
    CyclicTopologyUnsupported,
    MissingPiggyback,
    Protocol,
    ProtocolError,
    StaleMarker,
)
from .cic import CicClock, CicPiggyback, CicProtocol, piggyback_size
from .coordinated import CoordinatedProtocol
from .uncoordinated import UncoordinatedProtocol

__all__ = [
    "DISCARD", "FORCE", "PROCESS", "CyclicTopologyUnsupported", "MissingPiggyback", "Protocol",
    "ProtocolError", "StaleMarker", "CicClock", "CicPiggyback", "CicProtocol", "piggyback_size",
    "CoordinatedProtocol", "UncoordinatedProtocol",
]
