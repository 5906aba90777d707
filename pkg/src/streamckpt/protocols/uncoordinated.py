"""Uncoordinated checkpointing with upstream message logging and receiver dedup."""

from __future__ import annotations

from ..recovery import build_checkpoint_graph, invalid_count, replay_plan, rollback_propagation
from .base import Protocol


def metadata_bytes(cp) -> int:
    # owner id + index + (channel id, seq) pairs for both vectors
    return 16 + 16 * (len(cp.last_sent) + len(cp.last_received))


class UncoordinatedProtocol(Protocol):
    name = "UNC"
    logs_messages = True

    def __init__(self, world):
        super().__init__(world)
        self.floor = {inst.iid: 0 for inst in world.instances}
        self._since_gc = 0
        n = len(world.instances)
        self.gc_every = world.cfg.gc_every or n

    # triggers ---------------------------------------------------------------

    def start(self):
        for inst in self.world.instances:
            inst.phase = self.world.seeded_phase(inst)
            self._arm(inst, inst.phase)

    def _arm(self, inst, t):
        if t <= self.world.cfg.horizon:
            self.world.schedule(t, self._on_trigger, (inst, inst.trigger_token))

    def _on_trigger(self, arg):
        inst, token = arg
        if token != inst.trigger_token:
            return
        self.world.log("CheckpointTrigger", f"inst={inst.name}")
        self.world.request_checkpoint(inst, "local")
        self._arm(inst, self.world.now + self.world.cfg.interval)

    def reset_trigger(self, inst):
        """Next local trigger one interval after now (used after a forced checkpoint)."""
        inst.trigger_token += 1
        self._arm(inst, self.world.now + self.world.cfg.interval)

    def resume(self):
        now, iv = self.world.now, self.world.cfg.interval
        for inst in self.world.instances:
            inst.trigger_token += 1
            k = int((now - inst.phase) // iv) + 1 if now >= inst.phase else 0
            t = inst.phase + k * iv
            while t <= now:
                t += iv
            self._arm(inst, t)

    # data path -----------------------------------------------------------------

    def on_send(self, inst, msg, dst):
        self.world.store.log(msg.cid).append(msg)

    def process_cost(self, n_outputs):
        return self.world.cost.log_time_per_message * n_outputs

    # checkpoints -----------------------------------------------------------

    def on_durable(self, inst, cp):
        w = self.world
        w.metrics.control_bytes += metadata_bytes(cp)
        self._since_gc += 1
        if self._since_gc >= self.gc_every:
            self._since_gc = 0
            self.collect_garbage()

    def collect_garbage(self):
        """Advance the floor to the current recovery line; drop log entries below it."""
        w = self.world
        line = self.recovery_line()
        self.floor = line
        store = w.store
        for cid, lg in store.message_logs.items():
            dst = w.channel_ends[cid][1]
            upto = store.get(dst, line[dst]).last_received.get(cid, 0)
            w.metrics.log_entries_gc += lg.drop_through(upto)
        store.release_states_below(line)

    # recovery --------------------------------------------------------------

    def recovery_line(self) -> dict:
        w = self.world
        graph = build_checkpoint_graph(w.store.checkpoints, w.channel_ends, self.floor)
        return rollback_propagation(graph)

    def invalid_at_recovery(self, latest, line):
        return invalid_count(latest, line)

    def replay_plan(self, line_cps):
        w = self.world
        logs = {cid: (lg.base, lg.entries) for cid, lg in w.store.message_logs.items()}
        return replay_plan(line_cps, logs, w.channel_ends, w.cfg.replay_policy)

    def on_restore(self, inst, cp):
        self.floor[inst.iid] = cp.index
