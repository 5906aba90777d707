"""Coordinated aligned checkpointing: marker rounds started by a coordinator."""

from __future__ import annotations

from dataclasses import dataclass, field

from .base import Protocol, ProtocolError, StaleMarker


class RoundOverlap(ProtocolError):
    """Raised only by strict callers; the coordinator itself skips and counts."""


@dataclass
class Round:
    number: int
    start: float
    acks: set = field(default_factory=set)
    blocked: dict = field(default_factory=dict)  # instance name -> alignment blocked time
    complete: float | None = None


class CoordinatedProtocol(Protocol):
    name = "COOR"

    def __init__(self, world):
        super().__init__(world)
        self.committed = 0
        self.last_started = 0
        self.current: Round | None = None
        self._tick = 0

    # coordinator -------------------------------------------------------------

    def start(self):
        self._arm_tick(1)

    def _arm_tick(self, k):
        t = k * self.world.cfg.interval
        if t <= self.world.cfg.horizon:
            self.world.schedule(t, self._on_tick, k)

    def _on_tick(self, k):
        w = self.world
        w.log("CheckpointTrigger", f"source=coordinator tick={k}")
        if self.current is not None:
            w.metrics.skipped_rounds += 1
            w.log("RoundSkipped", f"round={self.current.number}")
        else:
            self._start_round()
        self._arm_tick(k + 1)

    def _start_round(self):
        w = self.world
        r = self.last_started + 1
        self.last_started = r
        self.current = Round(r, w.now)
        w.log("RoundStart", f"round={r}")
        for inst in w.instances:
            if inst.is_source:
                w.metrics.control_bytes += w.cost.control_bytes
                w.schedule(w.now + w.cost.control_latency, self._on_control, (inst, r))

    def _on_control(self, arg):
        inst, r = arg
        inst.round = r
        self.world.request_checkpoint(inst, "round")

    def _on_ack(self, arg):
        owner, r = arg
        cur = self.current
        if cur is None or cur.number != r:
            return
        cur.acks.add(owner)
        if len(cur.acks) == len(self.world.instances):
            w = self.world
            cur.complete = w.now
            self.committed = r
            self.current = None
            w.metrics.rounds.append({"round": r, "start": cur.start, "complete": w.now,
                                     "duration": w.now - cur.start, "blocked": dict(cur.blocked)})
            w.log("RoundComplete", f"round={r}")
            w.store.release_states_below({o: r for o in w.store.checkpoints})

    # instances ----------------------------------------------------------------

    def on_marker(self, inst, msg):
        r = msg.marker
        expected = inst.round + 1 if not inst.markers else inst.round
        if r != expected or msg.cid in inst.markers:
            raise StaleMarker(f"{inst.name}: marker round {r} on channel {msg.cid}, expected {expected}")
        w = self.world
        if not inst.markers:
            inst.round = r
            inst.align_start = w.now
        inst.markers.add(msg.cid)
        inst.blocked.add(msg.cid)
        w.log("MarkerProcessed", f"inst={inst.name} cid={msg.cid} round={r}")
        if len(inst.markers) == len(inst.in_cids):
            inst.pending_ckpt = "round"

    def on_checkpoint(self, inst, kind, index):
        if index != inst.round:
            raise ProtocolError(f"{inst.name}: checkpoint index {index} != round {inst.round}")
        return None

    def after_snapshot(self, inst, cp):
        w = self.world
        for cid in (c for _, cids in inst.out_routes.values() for c in cids):
            w.send_marker(inst, cid, cp.index)
        if inst.align_start is not None:
            blocked = w.now - inst.align_start
            w.metrics.blocked_time += blocked
            if self.current is not None and self.current.number == cp.index:
                self.current.blocked[inst.name] = blocked
        inst.align_start = None
        inst.markers.clear()
        inst.blocked.clear()

    def on_durable(self, inst, cp):
        w = self.world
        w.metrics.control_bytes += w.cost.control_bytes
        w.schedule(w.now + w.cost.control_latency, self._on_ack, (cp.owner, cp.index))

    # recovery -----------------------------------------------------------------

    def recovery_line(self):
        return {inst.iid: self.committed for inst in self.world.instances}

    def abandoned_at_recovery(self, latest, line):
        return sum(latest[o] - line[o] for o in latest)

    def replay_plan(self, line_cps):
        # aligned rounds leave no in-flight messages: every channel's receiver
        # processed exactly what its sender had sent at the round snapshot
        w = self.world
        for cid, (src, dst) in w.channel_ends.items():
            sent = line_cps[src].last_sent.get(cid, 0)
            recv = line_cps[dst].last_received.get(cid, 0)
            if sent != recv:
                raise ProtocolError(f"round {self.committed} captured in-flight data on channel {cid}")
        return {}

    def on_restore(self, inst, cp):
        inst.round = cp.index

    def resume(self):
        w = self.world
        self.current = None
        self.last_started = self.committed
        k = int(w.now // w.cfg.interval) + 1
        self._arm_tick(k)
