"""Checkpoint graphs, recovery lines and the independent oracles that check them.

Owners are any sortable hashable ids (operator instances in the simulator).
Checkpoint index 0 is the implicit initial checkpoint: empty state, all
sequence counters 0.

Two independent routes exist on purpose:

* ``build_checkpoint_graph`` + ``rollback_propagation`` work only from the
  per-checkpoint sequence metadata (``last_sent`` / ``last_received``).
* ``brute_force_recovery_line``, ``find_orphans`` and ``useless_checkpoints``
  work only from a ``History`` of individual sends and receives tagged with
  checkpoint intervals.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable

from . import kernels


class RecoveryError(RuntimeError):
    pass


class MissingMetadata(RecoveryError):
    pass


class NoConsistentLine(RecoveryError):
    pass


class LogTruncated(RecoveryError):
    pass


@dataclass(frozen=True)
class CheckpointMeta:
    owner: Hashable
    index: int
    last_sent: dict  # cid -> highest seq sent before the snapshot point
    last_received: dict  # cid -> highest seq processed before the snapshot point


def initial_meta(owner) -> CheckpointMeta:
    return CheckpointMeta(owner, 0, {}, {})


@dataclass
class CheckpointGraph:
    nodes: list  # (owner, index), sorted
    edges: set  # ((owner, x), (owner', y))

    def __post_init__(self):
        self.node_id = {n: k for k, n in enumerate(self.nodes)}
        succ = [[] for _ in self.nodes]
        for a, b in self.edges:
            succ[self.node_id[a]].append(self.node_id[b])
        self.indptr = [0]
        self.indices = []
        for lst in succ:
            lst.sort()
            self.indices.extend(lst)
            self.indptr.append(len(self.indices))

    def latest(self) -> dict:
        out = {}
        for owner, idx in self.nodes:
            if idx > out.get(owner, -1):
                out[owner] = idx
        return out

    def has_node(self, owner, index) -> bool:
        return (owner, index) in self.node_id


def build_checkpoint_graph(checkpoints: dict, channels: dict, floor: dict | None = None) -> CheckpointGraph:
    """Nodes are all checkpoints; edges follow the two checkpoint-graph rules.

    ``checkpoints``: owner -> list of CheckpointMeta ordered by index (index 0
    included). ``channels``: cid -> (sender owner, receiver owner). ``floor``
    optionally drops checkpoints older than a known consistent line; no path
    from a checkpoint at or above a consistent line can reach below it, so
    reachability among the kept nodes is unchanged.
    """
    floor = floor or {}
    kept = {}
    for owner, cps in checkpoints.items():
        lo = floor.get(owner, 0)
        kept[owner] = [cp for cp in cps if cp.index >= lo]
        for k, cp in enumerate(kept[owner]):
            if cp.index != lo + k:
                raise MissingMetadata(f"{owner}: checkpoint indices not consecutive")
    nodes = sorted((o, cp.index) for o, cps in kept.items() for cp in cps)
    edges = set()
    for owner, cps in kept.items():
        for a, b in zip(cps, cps[1:]):
            edges.add(((owner, a.index), (owner, b.index)))
    for cid, (src, dst) in sorted(channels.items(), key=lambda kv: kv[0]):
        if src == dst or src not in kept or dst not in kept:
            continue
        senders, receivers = kept[src], kept[dst]
        recv_seq = []
        for cp in receivers:
            try:
                recv_seq.append(cp.last_received.get(cid, 0) if cp.index else 0)
            except AttributeError:
                raise MissingMetadata(f"{dst}[{cp.index}] lacks last_received") from None
        y0 = 0
        for cp in senders:
            sent = cp.last_sent.get(cid, 0)
            # smallest receiver checkpoint that processed a seq above ``sent``
            while y0 < len(receivers) and recv_seq[y0] <= sent:
                y0 += 1
            for y in range(y0, len(receivers)):
                edges.add(((src, cp.index), (dst, receivers[y].index)))
    return CheckpointGraph(nodes, edges)


def strictly_reachable(graph: CheckpointGraph, root: dict) -> set:
    """Owners whose root member is reachable by >=1 edge from another root member."""
    owners = sorted(root)
    ids = [graph.node_id[(o, root[o])] for o in owners]
    marks = kernels.strict_reach_marks(len(graph.nodes), graph.indptr, graph.indices, ids)
    return {o for o, m in zip(owners, marks) if m}


def rollback_propagation(graph: CheckpointGraph) -> dict:
    root = graph.latest()
    marked = strictly_reachable(graph, root)
    while marked:
        for owner in marked:
            nxt = root[owner] - 1
            if not graph.has_node(owner, nxt):
                raise NoConsistentLine(f"ran out of checkpoints for {owner}")
            root[owner] = nxt
        marked = strictly_reachable(graph, root)
    return root


# ---------------------------------------------------------------------------
# trace-side oracles


@dataclass
class History:
    """Sends and receives with the checkpoint interval they happened in.

    Interval ``k`` of an owner is the span after its checkpoint ``k`` and
    before checkpoint ``k + 1``. ``messages[cid][seq - 1] = [send_iv, recv_iv]``
    with ``recv_iv`` None while unprocessed.
    """

    channels: dict  # cid -> (src, dst)
    taken: dict = field(default_factory=dict)  # owner -> number of checkpoints (excl. 0)
    messages: dict = field(default_factory=dict)

    def add_owner(self, owner):
        self.taken.setdefault(owner, 0)

    def checkpoint(self, owner) -> int:
        self.taken[owner] = self.taken.get(owner, 0) + 1
        return self.taken[owner]

    def send(self, cid, seq):
        lst = self.messages.setdefault(cid, [])
        if seq != len(lst) + 1:
            raise ValueError(f"history: send seq {seq} on channel {cid} after {len(lst)}")
        src = self.channels[cid][0]
        lst.append([self.taken.get(src, 0), None])

    def receive(self, cid, seq):
        dst = self.channels[cid][1]
        entry = self.messages[cid][seq - 1]
        if entry[1] is not None:
            raise ValueError(f"history: message {cid}/{seq} received twice")
        entry[1] = self.taken.get(dst, 0)

    def rollback(self, line: dict):
        """Forget everything after each owner's line checkpoint."""
        for owner, idx in line.items():
            self.taken[owner] = idx
        for cid, lst in self.messages.items():
            src, dst = self.channels[cid]
            ls, lr = line.get(src), line.get(dst)
            keep = [e for e in lst if ls is None or e[0] < ls]
            for e in keep:
                if lr is not None and e[1] is not None and e[1] >= lr:
                    e[1] = None
            lst[:] = keep

    def iter_messages(self):
        for cid in sorted(self.messages):
            src, dst = self.channels[cid]
            for seq, (a, b) in enumerate(self.messages[cid], 1):
                yield cid, seq, src, dst, a, b


def find_orphans(line: dict, history: History) -> list:
    """(cid, seq) of messages received before the receiver's line checkpoint
    but sent after the sender's."""
    out = []
    for cid, seq, src, dst, a, b in history.iter_messages():
        if b is not None and b < line[dst] and a >= line[src]:
            out.append((cid, seq))
    return out


def in_flight(line: dict, history: History) -> list:
    """Messages sent before the sender's line checkpoint and not received before the receiver's."""
    out = []
    for cid, seq, src, dst, a, b in history.iter_messages():
        if a < line[src] and (b is None or b >= line[dst]):
            out.append((cid, seq))
    return out


def brute_force_recovery_line(history: History) -> dict:
    """Enumerate every combination of checkpoints; keep the orphan-free ones;
    return their per-owner maximum (itself consistent)."""
    owners = sorted(history.taken)
    msgs = [(owners.index(src), owners.index(dst), a, b)
            for _, _, src, dst, a, b in history.iter_messages() if b is not None]
    best = [0] * len(owners)
    ranges = [range(history.taken[o] + 1) for o in owners]
    for combo in itertools.product(*ranges):
        if any(b < combo[d] and a >= combo[s] for s, d, a, b in msgs):
            continue
        best = [max(x, y) for x, y in zip(best, combo)]
    line = dict(zip(owners, best))
    if find_orphans(line, history):
        raise NoConsistentLine("consistent lines are not closed under maximum")
    return line


def useless_checkpoints(history: History) -> list:
    """Checkpoints that lie on a Z-cycle, found by Z-path search over the history.

    From checkpoint ``x`` of ``i`` a Z-path may leave ``i`` with any message
    sent in interval >= ``x``; after arriving at ``p`` in interval ``b`` it may
    continue with any message ``p`` sent in interval >= ``b``. A cycle exists
    when it arrives back at ``i`` in an interval < ``x``.
    """
    owners = sorted(history.taken)
    pos = {o: k for k, o in enumerate(owners)}
    by_sender = [[] for _ in owners]
    for _, _, src, dst, a, b in history.iter_messages():
        if b is not None:
            by_sender[pos[src]].append((a, pos[dst], b))
    for lst in by_sender:
        lst.sort(key=lambda t: (-t[0], t[1], t[2]))
    out = []
    for o in owners:
        i = pos[o]
        for x in range(1, history.taken[o] + 1):
            best = kernels.zpath_lowest_intervals(len(owners), by_sender, i, x)
            if best[i] is not None and best[i] < x:
                out.append((o, x))
    return out


def naive_z_cycles(history: History, max_len: int = 6) -> list:
    """Exhaustive Z-path enumeration up to ``max_len`` messages (tiny traces only)."""
    msgs = [(src, dst, a, b) for _, _, src, dst, a, b in history.iter_messages() if b is not None]
    out = []
    for o in sorted(history.taken):
        for x in range(1, history.taken[o] + 1):
            found = False
            stack = [[m] for m in msgs if m[0] == o and m[2] >= x]
            while stack and not found:
                path = stack.pop()
                last = path[-1]
                if last[1] == o and last[3] < x:
                    found = True
                    break
                if len(path) >= max_len:
                    continue
                for m in msgs:
                    if m[0] == last[1] and m[2] >= last[3] and m not in path:
                        stack.append(path + [m])
            if found:
                out.append((o, x))
    return out


def invalid_count(latest: dict, line: dict) -> int:
    return sum(latest[o] - line[o] for o in latest)


def replay_plan(line_meta: dict, logs: dict, channels: dict, policy: str = "receiver") -> dict:
    """Messages to re-deliver per channel after restoring ``line_meta``.

    ``logs``: cid -> (first retained seq, list of messages). Policy
    ``receiver`` replays seqs in (receiver.last_received, sender.last_sent];
    ``full-log`` replays every retained entry up to sender.last_sent and
    relies on receiver deduplication.
    """
    plan = {}
    for cid, (src, dst) in sorted(channels.items(), key=lambda kv: kv[0]):
        if cid not in logs:
            continue
        sent = line_meta[src].last_sent.get(cid, 0)
        recv = line_meta[dst].last_received.get(cid, 0)
        if recv > sent:
            raise NoConsistentLine(f"orphan on channel {cid}: received {recv} > sent {sent}")
        base, entries = logs[cid]
        lo = recv + 1 if policy == "receiver" else base
        if lo < base:
            raise LogTruncated(f"channel {cid}: need seq {lo} but log starts at {base}")
        plan[cid] = [m for m in entries if lo <= m.seq <= sent]
    return plan
