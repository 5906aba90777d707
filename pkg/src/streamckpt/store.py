"""Simulated durable store: checkpoints, upstream message logs, source log.

Nothing in here is touched by failure injection; recovery only archives
entries that lie beyond the chosen recovery line.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .dataflow import OperatorInstanceId, OperatorState


class SeqGap(RuntimeError):
    """A logged message does not continue its channel's sequence (internal bug guard)."""


@dataclass
class Checkpoint:
    owner: OperatorInstanceId
    index: int
    state: OperatorState | None
    last_sent: dict
    last_received: dict
    protocol_meta: Any = None
    kind: str = "local"  # initial | local | forced | round
    start_time: float = 0.0
    durable_time: float | None = None
    size_bytes: int = 0

    def __repr__(self):
        return f"Checkpoint({self.owner}, {self.index}, {self.kind})"


def initial_checkpoint(owner) -> Checkpoint:
    return Checkpoint(owner, 0, None, {}, {}, kind="initial", durable_time=0.0)


class MessageLog:
    """Upstream-backup log of one channel; entries have consecutive seqs."""

    __slots__ = ("base", "entries")

    def __init__(self):
        self.base = 1  # seq of entries[0]
        self.entries: list = []

    @property
    def head(self) -> int:
        return self.base + len(self.entries) - 1

    def append(self, msg):
        if msg.seq != self.base + len(self.entries):
            raise SeqGap(f"channel {msg.cid}: logged seq {msg.seq}, expected {self.base + len(self.entries)}")
        self.entries.append(msg)

    def drop_through(self, seq: int) -> int:
        """GC: forget entries with seq <= ``seq``; returns how many were dropped."""
        n = min(max(0, seq - self.base + 1), len(self.entries))
        if n:
            del self.entries[:n]
            self.base += n
        return n

    def truncate_after(self, seq: int) -> list:
        keep = max(0, seq - self.base + 1)
        tail = self.entries[keep:]
        del self.entries[keep:]
        return tail

    def __len__(self):
        return len(self.entries)


@dataclass
class DurableStore:
    owners: list
    checkpoints: dict = field(default_factory=dict)  # owner -> [Checkpoint], position == index
    message_logs: dict = field(default_factory=dict)  # cid -> MessageLog
    source_log: dict = field(default_factory=dict)  # source operator -> partitions -> records
    archived: list = field(default_factory=list)
    archived_log_entries: int = 0

    def __post_init__(self):
        for o in self.owners:
            self.checkpoints.setdefault(o, [initial_checkpoint(o)])

    def add(self, cp: Checkpoint):
        lst = self.checkpoints[cp.owner]
        if cp.index != len(lst):
            raise RuntimeError(f"{cp.owner}: durable index {cp.index} after {len(lst) - 1}")
        prev = lst[-1].durable_time or 0.0
        if cp.index > 1 and not cp.durable_time > prev:
            raise RuntimeError(f"{cp.owner}: durable_time not increasing at index {cp.index}")
        lst.append(cp)

    def latest(self, owner) -> Checkpoint:
        return self.checkpoints[owner][-1]

    def get(self, owner, index) -> Checkpoint:
        return self.checkpoints[owner][index]

    def latest_indices(self) -> dict:
        return {o: len(lst) - 1 for o, lst in self.checkpoints.items()}

    def log(self, cid) -> MessageLog:
        lg = self.message_logs.get(cid)
        if lg is None:
            lg = self.message_logs[cid] = MessageLog()
        return lg

    def archive_after(self, line: dict) -> list:
        """Move checkpoints newer than ``line`` out of the live set."""
        gone = []
        for o, idx in line.items():
            lst = self.checkpoints[o]
            gone.extend(lst[idx + 1:])
            del lst[idx + 1:]
        self.archived.extend(gone)
        return gone

    def release_states_below(self, floor: dict):
        """Drop snapshot payloads older than a consistent line (metadata stays)."""
        for o, idx in floor.items():
            for cp in self.checkpoints[o][1:idx]:
                cp.state = None
