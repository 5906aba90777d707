"""Protocol hook interface used by the simulation kernel, and the NONE baseline."""

from __future__ import annotations

PROCESS = "process"
DISCARD = "discard"
FORCE = "force"


class ProtocolError(RuntimeError):
    """Protocol state machine reached an impossible state (aborts the run)."""


class CyclicTopologyUnsupported(ProtocolError):
    pass


class StaleMarker(ProtocolError):
    pass


class MissingPiggyback(ProtocolError):
    pass


class Protocol:
    """No checkpoints at all; recovery restarts every instance from scratch.

    The kernel calls these hooks; subclasses override what they need.
    """

    name = "NONE"
    logs_messages = False

    def __init__(self, world):
        self.world = world

    # lifecycle
    def start(self):
        pass

    def resume(self):
        """Called once the restart after a failure has completed."""

    # data path
    def piggyback_bytes(self) -> int:
        return 0

    def on_send(self, inst, msg, dst):
        pass

    def admit(self, inst, msg) -> str:
        if self.world.cfg.dedup and msg.seq <= inst.last_received.get(msg.cid, 0):
            return DISCARD
        return PROCESS

    def before_process(self, inst, msg):
        pass

    def on_marker(self, inst, msg):
        raise StaleMarker(f"{inst.iid}: marker under protocol {self.name}")

    def process_cost(self, n_outputs: int) -> float:
        return 0.0

    # checkpoints
    def on_checkpoint(self, inst, kind: str, index: int):
        """Clock/bookkeeping update at the snapshot point; returns protocol_meta."""
        return None

    def after_snapshot(self, inst, cp):
        pass

    def on_durable(self, inst, cp):
        pass

    # recovery
    def recovery_line(self) -> dict:
        return {inst.iid: 0 for inst in self.world.instances}

    def invalid_at_recovery(self, latest: dict, line: dict) -> int:
        return 0

    def abandoned_at_recovery(self, latest: dict, line: dict) -> int:
        return 0

    def replay_plan(self, line_cps: dict) -> dict:
        return {}

    def on_restore(self, inst, cp):
        pass
