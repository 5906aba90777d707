"""Dataflow graph model: operators, instance channels, messages and keyed state."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Any, Iterable, NamedTuple

import yaml

GRAPH_HEADER = "streamckpt-graph v1"

FORWARD = "forward"
SHUFFLE = "shuffle"
BROADCAST = "broadcast"
FEEDBACK = "feedback"
CHANNEL_KINDS = (FORWARD, SHUFFLE, BROADCAST, FEEDBACK)


class GraphError(ValueError):
    """Malformed graph description."""


class UnflaggedCycle(GraphError):
    """A directed cycle runs through channels not flagged as feedback."""


class DanglingOperator(GraphError):
    """An operator is cut off from the sources or from the sinks."""


class OperatorInstanceId(NamedTuple):
    operator_name: str
    index: int

    def __str__(self):
        return f"{self.operator_name}[{self.index}]"


@dataclass(frozen=True)
class OperatorSpec:
    name: str
    parallelism: int
    logic: str
    stateful: bool = False
    params: dict = field(default_factory=dict, compare=False, hash=False)


@dataclass(frozen=True)
class ChannelSpec:
    """Operator-level edge; expanded into instance channels by ``build_graph``."""

    src: str
    dst: str
    kind: str = SHUFFLE
    base_latency: float = 0.0005
    bandwidth: float = 1.25e7  # bytes per time unit


@dataclass(frozen=True)
class Channel:
    cid: int
    src: OperatorInstanceId
    dst: OperatorInstanceId
    kind: str
    base_latency: float
    bandwidth: float

    @property
    def feedback(self) -> bool:
        return self.kind == FEEDBACK

    def __str__(self):
        return f"{self.src}->{self.dst}"


class Message:
    """One transmission on a channel.

    ``marker`` is the round number for coordinated-protocol markers and 0 for
    data messages. ``size`` is the payload size under the size model;
    ``pb_size`` the piggyback size.
    """

    __slots__ = (
        "cid", "seq", "send_time", "payload", "size", "source_event_time",
        "piggyback", "pb_size", "marker", "replay",
    )

    def __init__(self, cid, seq, send_time, payload, size, source_event_time,
                 piggyback=None, pb_size=0, marker=0):
        self.cid = cid
        self.seq = seq
        self.send_time = send_time
        self.payload = payload
        self.size = size
        self.source_event_time = source_event_time
        self.piggyback = piggyback
        self.pb_size = pb_size
        self.marker = marker
        self.replay = False

    @property
    def total_size(self) -> int:
        return self.size + self.pb_size

    def __repr__(self):
        if self.marker:
            return f"Marker(cid={self.cid}, round={self.marker})"
        return f"Message(cid={self.cid}, seq={self.seq}, payload={self.payload!r})"


def size_of(value: Any) -> int:
    """Byte size of ``value`` under the fixed per-field size model."""
    if value is None:
        return 0
    if isinstance(value, bool):
        return 1
    if isinstance(value, (int, float)):
        return 8
    if isinstance(value, str):
        return len(value.encode())
    if isinstance(value, bytes):
        return len(value)
    if isinstance(value, dict):
        return sum(size_of(k) + size_of(v) for k, v in value.items())
    if isinstance(value, (tuple, list, set, frozenset)):
        return sum(size_of(v) for v in value)
    raise TypeError(f"no size model for {type(value).__name__}")


def partition_for(key: Any, parallelism: int) -> int:
    """Deterministic key-to-instance routing (crc32 of the key's repr)."""
    return zlib.crc32(repr(key).encode()) % parallelism


def copy_containers(value):
    """Copy nested dicts/lists/sets; records (tuples, scalars) are immutable and shared."""
    if isinstance(value, dict):
        return {k: copy_containers(v) for k, v in value.items()}
    if isinstance(value, list):
        return [copy_containers(v) for v in value]
    if isinstance(value, set):
        return set(value)
    return value


@dataclass
class OperatorState:
    keyed_store: dict = field(default_factory=dict)
    input_offsets: dict = field(default_factory=dict)

    @property
    def size_bytes(self) -> int:
        return size_of(self.keyed_store) + 8 * len(self.input_offsets)

    def snapshot(self) -> "OperatorState":
        return OperatorState(copy_containers(self.keyed_store), dict(self.input_offsets))

    @classmethod
    def restore(cls, snap: "OperatorState") -> "OperatorState":
        return snap.snapshot()


class SeqCounter:
    """Per-channel sequence numbers; ``next_seq`` starts at 1 on each channel."""

    def __init__(self):
        self._last: dict[int, int] = {}

    def next_seq(self, channel) -> int:
        cid = channel.cid if isinstance(channel, Channel) else channel
        seq = self._last.get(cid, 0) + 1
        self._last[cid] = seq
        return seq

    def last(self, channel) -> int:
        cid = channel.cid if isinstance(channel, Channel) else channel
        return self._last.get(cid, 0)

    def reset(self, cid: int, last: int) -> None:
        self._last[cid] = last


class DataflowGraph:
    def __init__(self, operators, channel_specs, channels, sources, sinks):
        self.operators: dict[str, OperatorSpec] = {op.name: op for op in operators}
        self.channel_specs: list[ChannelSpec] = list(channel_specs)
        self.channels: list[Channel] = channels
        self.sources: list[str] = sources
        self.sinks: list[str] = sinks
        self.instances: list[OperatorInstanceId] = sorted(
            OperatorInstanceId(op.name, i)
            for op in operators
            for i in range(op.parallelism)
        )
        self.instance_index = {iid: n for n, iid in enumerate(self.instances)}
        self._in: dict[OperatorInstanceId, list[Channel]] = {i: [] for i in self.instances}
        self._out: dict[OperatorInstanceId, list[Channel]] = {i: [] for i in self.instances}
        for ch in channels:
            self._out[ch.src].append(ch)
            self._in[ch.dst].append(ch)

    def in_channels(self, iid) -> list[Channel]:
        return self._in[iid]

    def out_channels(self, iid) -> list[Channel]:
        return self._out[iid]

    @property
    def has_feedback(self) -> bool:
        return any(ch.feedback for ch in self.channels)

    def to_spec(self) -> dict:
        return {
            "operators": [
                {"name": op.name, "parallelism": op.parallelism, "logic": op.logic,
                 "stateful": op.stateful, **({"params": op.params} if op.params else {})}
                for op in self.operators.values()
            ],
            "channels": [
                {"from": c.src, "to": c.dst, "kind": c.kind,
                 "base_latency": c.base_latency, "bandwidth": c.bandwidth}
                for c in self.channel_specs
            ],
            "sources": list(self.sources),
            "sinks": list(self.sinks),
        }


def _op_from(entry) -> OperatorSpec:
    if isinstance(entry, OperatorSpec):
        return entry
    return OperatorSpec(
        name=str(entry["name"]),
        parallelism=int(entry.get("parallelism", 1)),
        logic=str(entry.get("logic", "identity")),
        stateful=bool(entry.get("stateful", False)),
        params=dict(entry.get("params") or {}),
    )


def _channel_from(entry) -> ChannelSpec:
    if isinstance(entry, ChannelSpec):
        return entry
    kw = {}
    if "base_latency" in entry:
        kw["base_latency"] = float(entry["base_latency"])
    if "bandwidth" in entry:
        kw["bandwidth"] = float(entry["bandwidth"])
    return ChannelSpec(str(entry["from"]), str(entry["to"]), str(entry.get("kind", SHUFFLE)), **kw)


def _find_cycle(names: Iterable[str], edges: dict[str, list[str]]):
    color = dict.fromkeys(names, 0)
    for start in sorted(color):
        if color[start]:
            continue
        stack = [(start, iter(sorted(edges.get(start, ()))))]
        color[start] = 1
        path = [start]
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = 2
                stack.pop()
                path.pop()
            elif color[nxt] == 1:
                return path[path.index(nxt):] + [nxt]
            elif color[nxt] == 0:
                color[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(sorted(edges.get(nxt, ())))))
    return None


def build_graph(spec) -> DataflowGraph:
    """Validate a graph description and expand it into instance channels."""
    operators = [_op_from(o) for o in spec["operators"]]
    channel_specs = [_channel_from(c) for c in spec.get("channels", ())]
    names = [op.name for op in operators]
    if len(set(names)) != len(names):
        raise GraphError("operator names must be unique")
    ops = {op.name: op for op in operators}
    for op in operators:
        if op.parallelism < 1:
            raise GraphError(f"{op.name}: parallelism must be >= 1")
    seen_pairs = set()
    for c in channel_specs:
        if c.src not in ops or c.dst not in ops:
            raise GraphError(f"channel {c.src}->{c.dst} names an unknown operator")
        if c.kind not in CHANNEL_KINDS:
            raise GraphError(f"channel {c.src}->{c.dst}: unknown kind {c.kind!r}")
        if c.bandwidth <= 0 or c.base_latency < 0:
            raise GraphError(f"channel {c.src}->{c.dst}: need bandwidth > 0, base_latency >= 0")
        if c.kind == FORWARD and ops[c.src].parallelism != ops[c.dst].parallelism:
            raise GraphError(f"forward channel {c.src}->{c.dst} needs equal parallelism")
        if (c.src, c.dst) in seen_pairs:
            raise GraphError(f"duplicate channel {c.src}->{c.dst}")
        seen_pairs.add((c.src, c.dst))

    plain_edges: dict[str, list[str]] = {}
    for c in channel_specs:
        if c.kind != FEEDBACK:
            plain_edges.setdefault(c.src, []).append(c.dst)
    cycle = _find_cycle(names, plain_edges)
    if cycle:
        raise UnflaggedCycle("cycle through non-feedback channels: " + " -> ".join(cycle))

    has_in = {c.dst for c in channel_specs}
    has_out = {c.src for c in channel_specs}
    sources = list(spec.get("sources") or [n for n in names if n not in has_in])
    sinks = list(spec.get("sinks") or [n for n in names if n not in has_out])
    for n in names:
        if n not in sources and n not in has_in:
            raise DanglingOperator(f"{n} is not a source and has no incoming channel")
        if n not in sinks and n not in has_out:
            raise DanglingOperator(f"{n} is not a sink and has no outgoing channel")
    all_edges: dict[str, list[str]] = {}
    for c in channel_specs:
        all_edges.setdefault(c.src, []).append(c.dst)
    reached = set(sources)
    frontier = list(sources)
    while frontier:
        n = frontier.pop()
        for m in all_edges.get(n, ()):
            if m not in reached:
                reached.add(m)
                frontier.append(m)
    unreached = [n for n in names if n not in reached]
    if unreached:
        raise DanglingOperator(f"unreachable from sources: {', '.join(unreached)}")

    pairs = []
    for c in channel_specs:
        p_src, p_dst = ops[c.src].parallelism, ops[c.dst].parallelism
        if c.kind == FORWARD:
            links = [(i, i) for i in range(p_src)]
        else:
            links = [(i, j) for i in range(p_src) for j in range(p_dst)]
        for i, j in links:
            pairs.append((OperatorInstanceId(c.src, i), OperatorInstanceId(c.dst, j), c))
    pairs.sort(key=lambda t: (t[0], t[1]))
    channels = [
        Channel(n, a, b, c.kind, c.base_latency, c.bandwidth)
        for n, (a, b, c) in enumerate(pairs)
    ]
    return DataflowGraph(operators, channel_specs, channels, sources, sinks)


def load_graph_file(path) -> DataflowGraph:
    with open(path) as fh:
        text = fh.read()
    return build_graph(parse_graph_text(text))


def parse_graph_text(text: str) -> dict:
    first, _, body = text.partition("\n")
    if first.strip() != GRAPH_HEADER:
        raise GraphError(f"expected header {GRAPH_HEADER!r}, got {first.strip()!r}")
    spec = yaml.safe_load(body) or {}
    if not isinstance(spec, dict) or "operators" not in spec:
        raise GraphError("graph file needs an 'operators' list")
    return spec


def dump_graph_text(graph: DataflowGraph) -> str:
    return GRAPH_HEADER + "\n" + yaml.safe_dump(graph.to_spec(), sort_keys=False)
