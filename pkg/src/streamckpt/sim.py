"""Deterministic discrete-event kernel.

Events live in a heap keyed by ``(time, tiebreak)`` where ``tiebreak`` is a
global issue counter, so execution order is total and reproducible. A worker
``w`` hosts instance ``w`` of every operator. Failures roll the whole pipeline
back to the protocol's recovery line (stop, restore, resume).
"""

from __future__ import annotations

import heapq
import random
from collections import deque
from dataclasses import dataclass, field

from .dataflow import FEEDBACK, FORWARD, Message, OperatorState, partition_for, size_of
from .protocols.base import DISCARD, FORCE, CyclicTopologyUnsupported, Protocol, ProtocolError
from .recovery import History, RecoveryError, useless_checkpoints
from .store import Checkpoint, DurableStore
from .trace import format_line, trace_hash
from .workloads.logic import ALL

PROTOCOLS = ("COOR", "UNC", "CIC", "NONE")


class ConfigInvalid(ValueError):
    pass


class UnknownWorker(ConfigInvalid):
    pass


class InvariantViolation(RuntimeError):
    pass


DEFAULT_SERVICE = {
    "source": 0.0005,
    "sink": 0.0005,
    "map_price": 0.001,
    "identity": 0.0005,
    "inc_join": 0.002,
    "window_join": 0.002,
    "window_count": 0.0015,
    "reach_links_source": 0.0005,
    "reach_nodes_source": 0.0005,
    "reach_join": 0.002,
    "reach_select": 0.0005,
    "reach_project": 0.0005,
    "bounce": 0.001,
}


@dataclass
class CostModel:
    """Simulated time charged for work; all values are per time unit ("seconds")."""

    service_time: dict = field(default_factory=lambda: dict(DEFAULT_SERVICE))
    default_service_time: float = 0.001
    per_byte_time: float = 1e-6  # (de)serialization, input + output bytes
    per_output_time: float = 5e-5
    log_time_per_message: float = 2e-5  # upstream-backup append (UNC/CIC)
    snapshot_fixed_time: float = 0.0005
    snapshot_time_per_byte: float = 2e-8
    restore_fixed_time: float = 0.001
    restore_time_per_byte: float = 2e-8
    replay_prepare_time_per_message: float = 1e-4
    store_latency: float = 0.002
    upload_time_per_byte: float = 1e-8
    control_latency: float = 0.0005
    detection_latency: float = 0.0
    marker_bytes: int = 16
    control_bytes: int = 16
    queue_capacity: int = 64  # per instance, split over its non-feedback inputs

    def __post_init__(self):
        for k, v in vars(self).items():
            if isinstance(v, (int, float)) and v < 0:
                raise ConfigInvalid(f"cost.{k} must be >= 0")
        if self.queue_capacity < 1:
            raise ConfigInvalid("cost.queue_capacity must be >= 1")
        if any(v < 0 for v in self.service_time.values()):
            raise ConfigInvalid("service times must be >= 0")

    def service(self, logic_id: str) -> float:
        return self.service_time.get(logic_id, self.default_service_time)


@dataclass(frozen=True)
class FailureSpec:
    time: float
    worker: int


@dataclass
class SimConfig:
    protocol: str = "NONE"
    interval: float = 1.0
    horizon: float = 10.0
    seed: int = 0
    failures: tuple = ()
    cost: CostModel = field(default_factory=CostModel)
    dedup: bool = True
    replay_policy: str = "receiver"  # or "full-log"
    gc_every: int = 0  # durable checkpoints between log GC passes; 0 = number of instances
    trace: bool = True
    history: bool = True
    z_check: bool = False  # Z-cycle analysis of the final history (UNC/CIC)

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigInvalid(f"protocol must be one of {PROTOCOLS}")
        if not self.horizon > 0:
            raise ConfigInvalid("horizon must be > 0")
        if not self.interval > 0:
            raise ConfigInvalid("interval must be > 0")
        if self.replay_policy not in ("receiver", "full-log"):
            raise ConfigInvalid("replay_policy must be 'receiver' or 'full-log'")
        self.failures = tuple(
            f if isinstance(f, FailureSpec) else FailureSpec(float(f[0]), int(f[1])) for f in self.failures
        )
        for f in self.failures:
            if not 0 <= f.time <= self.horizon:
                raise ConfigInvalid(f"failure time {f.time} outside [0, horizon]")


@dataclass
class MetricsRaw:
    latencies: list = field(default_factory=list)  # (sink completion time, latency)
    consumed: list = field(default_factory=list)  # source read times
    ingested: list = field(default_factory=list)  # first-stage processing times of source records
    checkpoints: list = field(default_factory=list)  # (owner, index, kind, start, durable)
    rounds: list = field(default_factory=list)
    skipped_rounds: int = 0
    forced_checkpoints: int = 0
    data_bytes: int = 0
    piggyback_bytes: int = 0
    marker_bytes: int = 0
    control_bytes: int = 0
    replay_bytes: int = 0
    replayed_messages: int = 0
    discarded_duplicates: int = 0
    recoveries: list = field(default_factory=list)
    invalid_checkpoints: int = 0
    abandoned_checkpoints: int = 0
    useless_checkpoints: int | None = None
    log_entries_gc: int = 0
    blocked_time: float = 0.0
    end_time: float = 0.0
    events: int = 0

    @property
    def total_bytes(self) -> int:
        return self.data_bytes + self.piggyback_bytes + self.marker_bytes + self.control_bytes + self.replay_bytes


class Instance:
    __slots__ = (
        "iid", "gid", "name", "logic_id", "logic", "worker", "is_source", "is_sink", "keeps_state",
        "in_cids", "out_routes", "state", "fifo", "last_received", "seq", "busy", "stalled",
        "pending_ckpt", "held", "snap", "out", "out_time", "next_index", "upload_free", "records",
        "wake_at", "blocked", "markers", "align_start", "round", "clock", "trigger_token", "phase",
        "service",
    )

    def __init__(self, iid, gid):
        self.iid = iid
        self.gid = gid
        self.name = str(iid)
        self.worker = iid.index
        self.in_cids = []
        self.out_routes = {}
        self.records = None
        self.clock = None
        self.phase = 0.0
        self.trigger_token = 0
        self.reset()

    def reset(self):
        self.state = OperatorState()
        self.fifo = deque()
        self.last_received = {}
        self.seq = {}
        self.busy = False
        self.stalled = set()
        self.pending_ckpt = None
        self.held = None
        self.snap = None
        self.out = None
        self.out_time = None
        self.next_index = 1
        self.upload_free = 0.0
        self.wake_at = None
        self.blocked = set()
        self.markers = set()
        self.align_start = None
        self.round = 0


class ChannelRT:
    __slots__ = ("ch", "src", "dst", "capacity", "inflight", "pending", "link_free")

    def __init__(self, ch, src, dst, capacity):
        self.ch = ch
        self.src = src
        self.dst = dst
        self.capacity = capacity
        self.inflight = 0
        self.pending = deque()
        self.link_free = 0.0


def make_protocol(name: str, world) -> Protocol:
    from .protocols.cic import CicProtocol
    from .protocols.coordinated import CoordinatedProtocol
    from .protocols.uncoordinated import UncoordinatedProtocol

    return {"NONE": Protocol, "COOR": CoordinatedProtocol, "UNC": UncoordinatedProtocol,
            "CIC": CicProtocol}[name](world)


class World:
    def __init__(self, graph, logic: dict, streams: dict, cfg: SimConfig):
        self.graph = graph
        self.cfg = cfg
        self.cost = cfg.cost
        if cfg.protocol == "COOR" and graph.has_feedback:
            raise CyclicTopologyUnsupported(
                "coordinated aligned checkpointing cannot run on a graph with feedback channels")
        self.n_workers = max(op.parallelism for op in graph.operators.values())
        for f in cfg.failures:
            if not 0 <= f.worker < self.n_workers:
                raise UnknownWorker(f"worker {f.worker} does not exist (have {self.n_workers})")
        self.instances = [Instance(iid, g) for g, iid in enumerate(graph.instances)]
        self.by_iid = {inst.iid: inst for inst in self.instances}
        for inst in self.instances:
            op = graph.operators[inst.iid.operator_name]
            inst.logic_id = op.logic
            inst.logic = logic[op.name]
            inst.is_source = op.name in graph.sources
            inst.is_sink = op.name in graph.sinks
            inst.keeps_state = op.stateful or inst.is_source
            inst.service = self.cost.service(op.logic)
            if inst.is_source:
                parts = streams.get(op.name)
                if parts is None or len(parts) != op.parallelism:
                    raise ConfigInvalid(f"source {op.name} needs {op.parallelism} input partitions")
                inst.records = parts[inst.iid.index]
        self.channels = {}
        for ch in graph.channels:
            src, dst = self.by_iid[ch.src], self.by_iid[ch.dst]
            dst.in_cids.append(ch.cid)
        for ch in graph.channels:
            src, dst = self.by_iid[ch.src], self.by_iid[ch.dst]
            n_in = sum(1 for c in dst.in_cids if not graph.channels[c].feedback)
            cap = float("inf") if ch.feedback else max(1, self.cost.queue_capacity // max(1, n_in))
            self.channels[ch.cid] = ChannelRT(ch, src, dst, cap)
            kind, cids = src.out_routes.setdefault(ch.dst.operator_name, (ch.kind, []))
            cids.append(ch.cid)
        self.channel_ends = {cid: (rt.src.iid, rt.dst.iid) for cid, rt in self.channels.items()}
        self._ingress = {cid for cid, rt in self.channels.items() if rt.src.is_source}
        self.store = DurableStore([i.iid for i in self.instances], source_log=streams)
        self.history = History(self.channel_ends) if cfg.history else None
        if self.history is not None:
            for inst in self.instances:
                self.history.add_owner(inst.iid)
        self.metrics = MetricsRaw()
        self.lines: list[str] | None = [] if cfg.trace else None
        self.now = 0.0
        self._tb = 0
        self._cur_tb = 0
        self._heap: list = []
        self.epoch = 1
        self._ready: deque = deque()
        self.recovering = False
        self._queued_failures: deque = deque()
        self._replay: dict = {}
        self.protocol = make_protocol(cfg.protocol, self)
        self._pb_bytes = self.protocol.piggyback_bytes()

    # -- plumbing ---------------------------------------------------------

    def schedule(self, t: float, fn, arg=None, always: bool = False):
        self._tb += 1
        heapq.heappush(self._heap, (t, self._tb, 0 if always else self.epoch, fn, arg))

    def log(self, kind: str, details: str):
        if self.lines is not None:
            self.lines.append(format_line(self.now, self._cur_tb, kind, details))

    def ready(self, inst):
        self._ready.append(inst)

    def seeded_phase(self, inst) -> float:
        return random.Random(f"{self.cfg.seed}:{inst.iid}").random() * self.cfg.interval

    # -- main loop --------------------------------------------------------

    def run(self):
        if self.lines is not None:
            for cid, rt in self.channels.items():
                self.log("Channel", f"cid={cid} src={rt.src.name} dst={rt.dst.name} kind={rt.ch.kind}")
        for f in self.cfg.failures:
            self.schedule(f.time, self._on_failure, f.worker, always=True)
        self.protocol.start()
        for inst in self.instances:
            if inst.is_source:
                self.ready(inst)
        heap = self._heap
        ready = self._ready
        n = 0
        while heap or ready:
            while ready:
                self._kick(ready.popleft())
            if not heap:
                break
            t, tb, epoch, fn, arg = heapq.heappop(heap)
            if epoch and epoch != self.epoch:
                continue
            self.now = t
            self._cur_tb = tb
            n += 1
            fn(arg)
        self.metrics.events = n
        self.metrics.end_time = self.now
        self._finish()
        return self

    def _finish(self):
        for inst in self.instances:
            if inst.busy or inst.fifo or inst.held is not None:
                raise InvariantViolation(f"{inst.name} did not drain")
        for rt in self.channels.values():
            if rt.inflight or rt.pending:
                raise InvariantViolation(f"channel {rt.ch} did not drain")
        if self.cfg.z_check and self.history is not None:
            self.metrics.useless_checkpoints = len(useless_checkpoints(self.history))

    @property
    def trace_hash(self) -> int | None:
        return trace_hash(self.lines) if self.lines is not None else None

    def sink_effect(self) -> dict:
        """Merged keyed store of all sink instances."""
        out: dict = {}
        for inst in self.instances:
            if inst.is_sink:
                for k, v in inst.state.keyed_store.items():
                    out[k] = out.get(k, 0) + v
        return out

    def keyed_stores(self) -> dict:
        return {inst.iid: inst.state.keyed_store for inst in self.instances}

    # -- processing -------------------------------------------------------

    def _kick(self, inst):
        if inst.busy or inst.stalled or self.recovering:
            return
        proto = self.protocol
        while True:
            if inst.pending_ckpt is not None:
                self._start_snapshot(inst)
                return
            if inst.is_source:
                self._source_step(inst)
                return
            msg = self._dequeue(inst)
            if msg is None:
                return
            if msg.marker:
                proto.on_marker(inst, msg)
                continue
            verdict = proto.admit(inst, msg)
            if verdict is DISCARD:
                self.metrics.discarded_duplicates += 1
                self.log("Discard", f"inst={inst.name} cid={msg.cid} seq={msg.seq}")
                continue
            if verdict is FORCE:
                inst.held = msg
                inst.pending_ckpt = "forced"
                continue
            self._process(inst, msg)
            return

    def _dequeue(self, inst):
        fifo = inst.fifo
        if not fifo:
            return None
        if not inst.blocked:
            msg = fifo.popleft()
        else:
            blocked = inst.blocked
            for k, m in enumerate(fifo):
                if m.cid not in blocked:
                    break
            else:
                return None
            msg = fifo[k]
            del fifo[k]
        self._return_credit(msg.cid)
        return msg

    def _return_credit(self, cid):
        rt = self.channels[cid]
        rt.inflight -= 1
        if rt.pending and rt.inflight < rt.capacity:
            self._wire(rt, rt.pending.popleft())
            if not rt.pending:
                src = rt.src
                src.stalled.discard(cid)
                if not src.stalled:
                    self.ready(src)

    def _source_step(self, inst):
        recs = inst.records
        part = inst.iid.index
        off = inst.state.input_offsets.get(part, 0)
        if off >= len(recs):
            return
        rec = recs[off]
        if rec.time > self.now:
            if inst.wake_at != rec.time:
                inst.wake_at = rec.time
                self.schedule(rec.time, self._on_wake, inst)
            return
        inst.state.input_offsets[part] = off + 1
        self.metrics.consumed.append(self.now)
        outs = self._resolve(inst, inst.logic.process(inst.state, None, rec.payload, rec.time))
        self.log("SourceEmit", f"inst={inst.name} off={off}")
        self._begin(inst, outs, rec.time, rec.size)

    def _on_wake(self, inst):
        inst.wake_at = None
        self.ready(inst)

    def _process(self, inst, msg):
        cid = msg.cid
        if msg.seq > inst.last_received.get(cid, 0):
            if self.history is not None:
                self.history.receive(cid, msg.seq)
            inst.last_received[cid] = msg.seq
        self.protocol.before_process(inst, msg)
        if cid in self._ingress:
            self.metrics.ingested.append(self.now)
        src = self.channels[cid].src.iid
        outs = self._resolve(inst, inst.logic.process(inst.state, src, msg.payload, msg.source_event_time))
        self.log("Process", f"inst={inst.name} cid={cid} seq={msg.seq}")
        self._begin(inst, outs, msg.source_event_time, msg.size + msg.pb_size)

    def _resolve(self, inst, outs):
        res = []
        for target, route, payload in outs:
            kind, cids = inst.out_routes[target]
            size = size_of(payload)
            if kind == FORWARD or len(cids) == 1:
                res.append((cids[0], payload, size))
            elif route is ALL:
                for c in cids:
                    res.append((c, payload, size))
            elif route is None:
                raise InvariantViolation(f"{inst.name}: unrouted output to {target}")
            else:
                res.append((cids[partition_for(route, len(cids))], payload, size))
        return res

    def _begin(self, inst, outs, event_time, in_bytes):
        c = self.cost
        out_bytes = sum(o[2] for o in outs) + self._pb_bytes * len(outs)
        dt = (inst.service + c.per_byte_time * (in_bytes + out_bytes)
              + c.per_output_time * len(outs) + self.protocol.process_cost(len(outs)))
        inst.busy = True
        inst.out = outs
        inst.out_time = event_time
        self.schedule(self.now + dt, self._on_done, inst)

    def _on_done(self, inst):
        inst.busy = False
        outs, et = inst.out, inst.out_time
        inst.out = None
        for cid, payload, size in outs:
            self._send(inst, cid, payload, size, et)
        if inst.is_sink:
            self.metrics.latencies.append((self.now, self.now - et))
        self.log("ProcessComplete", f"inst={inst.name} outs={len(outs)}")
        self.ready(inst)

    def _send(self, inst, cid, payload, size, event_time):
        seq = inst.seq.get(cid, 0) + 1
        inst.seq[cid] = seq
        msg = Message(cid, seq, self.now, payload, size, event_time)
        self.protocol.on_send(inst, msg, self.channels[cid].dst)
        if self.history is not None:
            self.history.send(cid, seq)
        m = self.metrics
        m.data_bytes += size
        m.piggyback_bytes += msg.pb_size
        self.log("Send", f"cid={cid} seq={seq} bytes={size} pb={msg.pb_size}")
        self._transmit(msg)

    def send_marker(self, inst, cid, round_no):
        msg = Message(cid, 0, self.now, None, self.cost.marker_bytes, None, marker=round_no)
        self.metrics.marker_bytes += msg.size
        self.log("SendMarker", f"cid={cid} round={round_no}")
        self._transmit(msg)

    def _transmit(self, msg):
        rt = self.channels[msg.cid]
        if rt.pending or rt.inflight >= rt.capacity:
            rt.pending.append(msg)
            rt.src.stalled.add(msg.cid)
        else:
            self._wire(rt, msg)

    def _wire(self, rt, msg):
        start = rt.link_free if rt.link_free > self.now else self.now
        rt.link_free = start + msg.total_size / rt.ch.bandwidth
        rt.inflight += 1
        self.schedule(rt.link_free + rt.ch.base_latency, self._on_deliver, msg)

    def _on_deliver(self, msg):
        dst = self.channels[msg.cid].dst
        dst.fifo.append(msg)
        if msg.marker:
            self.log("MarkerDeliver", f"cid={msg.cid} round={msg.marker}")
        else:
            self.log("Deliver", f"cid={msg.cid} seq={msg.seq}{' replay=1' if msg.replay else ''}")
        self.ready(dst)

    # -- checkpoints ------------------------------------------------------

    def request_checkpoint(self, inst, kind):
        if inst.pending_ckpt is None:
            inst.pending_ckpt = kind
            self.ready(inst)

    def _start_snapshot(self, inst):
        kind = inst.pending_ckpt
        inst.pending_ckpt = None
        index = inst.next_index
        inst.next_index += 1
        if self.history is not None:
            self.history.checkpoint(inst.iid)
        meta = self.protocol.on_checkpoint(inst, kind, index)
        state = inst.state.snapshot() if inst.keeps_state else None
        last_sent, last_received = dict(inst.seq), dict(inst.last_received)
        size = (state.size_bytes if state is not None else 0) + 16 * (len(last_sent) + len(last_received))
        cp = Checkpoint(inst.iid, index, state, last_sent, last_received, meta, kind, self.now, None, size)
        inst.snap = cp
        inst.busy = True
        self.log("SnapshotStart", f"inst={inst.name} index={index} kind={kind} bytes={size}")
        c = self.cost
        self.schedule(self.now + c.snapshot_fixed_time + c.snapshot_time_per_byte * size, self._on_snap_done, inst)

    def _on_snap_done(self, inst):
        cp = inst.snap
        inst.snap = None
        inst.busy = False
        c = self.cost
        start = max(self.now, inst.upload_free)
        durable = start + c.store_latency + c.upload_time_per_byte * cp.size_bytes
        inst.upload_free = durable
        self.schedule(durable, self._on_durable, cp)
        self.log("SnapshotComplete", f"inst={inst.name} index={cp.index}")
        self.protocol.after_snapshot(inst, cp)
        if inst.held is not None:
            msg, inst.held = inst.held, None
            self._process(inst, msg)
        else:
            self.ready(inst)

    def _on_durable(self, cp):
        cp.durable_time = self.now
        self.store.add(cp)
        self.metrics.checkpoints.append((cp.owner, cp.index, cp.kind, cp.start_time, self.now))
        self.log("Durable", f"inst={cp.owner} index={cp.index} kind={cp.kind}")
        self.protocol.on_durable(self.by_iid[cp.owner], cp)

    # -- failures and recovery ----------------------------------------------

    def _on_failure(self, worker):
        if self.recovering:
            self.log("FailureQueued", f"worker={worker}")
            self._queued_failures.append(worker)
            return
        self.log("FailureInject", f"worker={worker}")
        self.epoch += 1
        fail_time = self.now
        detect = fail_time + self.cost.detection_latency
        try:
            line = self.protocol.recovery_line()
        except RecoveryError as exc:
            raise InvariantViolation(str(exc)) from exc
        latest = self.store.latest_indices()
        invalid = self.protocol.invalid_at_recovery(latest, line)
        abandoned = self.protocol.abandoned_at_recovery(latest, line)
        line_cps = {o: self.store.get(o, idx) for o, idx in line.items()}
        try:
            plan = self.protocol.replay_plan(line_cps)
        except RecoveryError as exc:
            raise InvariantViolation(str(exc)) from exc
        self.store.archive_after(line)
        for cid, lg in self.store.message_logs.items():
            src = self.channel_ends[cid][0]
            self.store.archived_log_entries += len(lg.truncate_after(line_cps[src].last_sent.get(cid, 0)))
        if self.history is not None:
            self.history.rollback(line)
        c = self.cost
        per_worker = [0.0] * self.n_workers
        for inst in self.instances:
            cp = line_cps[inst.iid]
            inst.reset()
            if cp.state is not None:
                inst.state = OperatorState.restore(cp.state)
            elif cp.index and inst.keeps_state:
                raise InvariantViolation(f"{inst.name}: snapshot payload of checkpoint {cp.index} released")
            inst.seq = dict(cp.last_sent)
            inst.last_received = dict(cp.last_received)
            inst.next_index = cp.index + 1
            inst.upload_free = self.now
            self.protocol.on_restore(inst, cp)
            per_worker[inst.worker] += c.restore_fixed_time + c.restore_time_per_byte * cp.size_bytes
        n_replay = 0
        for cid, msgs in plan.items():
            per_worker[self.channels[cid].dst.worker] += c.replay_prepare_time_per_message * len(msgs)
            n_replay += len(msgs)
        for rt in self.channels.values():
            rt.inflight = 0
            rt.pending.clear()
            rt.link_free = 0.0
        self._ready.clear()
        restart_done = detect + max(per_worker)
        self.recovering = True
        self._replay = plan
        self.metrics.invalid_checkpoints += invalid
        self.metrics.abandoned_checkpoints += abandoned
        self.metrics.recoveries.append({
            "worker": worker, "failure_time": fail_time, "detect_time": detect,
            "restart_done": restart_done, "restart_time": restart_done - detect,
            "line": {str(o): i for o, i in line.items()}, "invalid": invalid,
            "abandoned": abandoned, "replayed": n_replay,
        })
        line_txt = ",".join(f"{o}:{i}" for o, i in line.items())
        self.log("Restore", f"line={line_txt} invalid={invalid} replay={n_replay}")
        self.schedule(restart_done, self._on_restart_done)

    def _on_restart_done(self, _=None):
        self.recovering = False
        self.log("RestartComplete", f"replay={sum(len(v) for v in self._replay.values())}")
        for cid in sorted(self._replay):
            for old in self._replay[cid]:
                msg = Message(cid, old.seq, self.now, old.payload, old.size, old.source_event_time,
                              old.piggyback, old.pb_size)
                msg.replay = True
                self.metrics.replay_bytes += msg.total_size
                self.metrics.replayed_messages += 1
                self.log("Replay", f"cid={cid} seq={msg.seq} bytes={msg.total_size}")
                self._transmit(msg)
        self._replay = {}
        self.protocol.resume()
        for inst in self.instances:
            self.ready(inst)
        if self._queued_failures:
            self._on_failure(self._queued_failures.popleft())


@dataclass
class RunResult:
    world: World
    metrics: MetricsRaw
    trace_hash: int | None

    @property
    def lines(self):
        return self.world.lines


def run(graph, logic: dict, streams: dict, cfg: SimConfig) -> RunResult:
    """Execute one simulation to quiescence (after ``horizon`` the run drains)."""
    world = World(graph, logic, streams, cfg)
    try:
        world.run()
    except ProtocolError as exc:
        if isinstance(exc, CyclicTopologyUnsupported):
            raise
        raise InvariantViolation(str(exc)) from exc
    return RunResult(world, world.metrics, world.trace_hash)
