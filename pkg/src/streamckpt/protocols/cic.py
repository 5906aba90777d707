"""Communication-induced checkpointing (HMNR family) on top of uncoordinated logging.

Each instance keeps a Lamport clock ``lc``, the ``ckpt`` vector (latest known
checkpoint index of every instance) and the boolean vectors ``sent_to``,
``taken`` and ``greater``. Everything but ``sent_to`` is piggybacked on data
messages. A checkpoint is forced before processing a message when

* C1: the sender's clock is larger and, for some ``k`` this instance sent to
  in the current interval, the sender's clock is also larger than what it
  knows of ``k`` (``pb.greater[k]``) -- a Z-path could leave this interval
  towards ``k`` and return with a smaller timestamp; or
* C2: the sender knows this instance's current checkpoint and a checkpoint
  lies on the causal path from it (``pb.taken[self]``) -- delivering the
  message would close a Z-cycle through this interval.

The direct-reply case (``sent_to[sender]`` with a larger sender clock) is a
special case of C1 and is checked explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .base import FORCE, PROCESS, MissingPiggyback
from .uncoordinated import UncoordinatedProtocol


def piggyback_size(n: int) -> int:
    """lc (8 bytes) + ckpt (8 per instance) + taken and greater (1 bit per instance each)."""
    return 8 + 8 * n + 2 * math.ceil(n / 8)


@dataclass(frozen=True)
class CicPiggyback:
    lc: int
    ckpt: tuple
    taken: tuple
    greater: tuple


class CicClock:
    __slots__ = ("n", "me", "lc", "ckpt", "sent_to", "taken", "greater")

    def __init__(self, n: int, me: int):
        self.n = n
        self.me = me
        self.lc = 1
        self.ckpt = [0] * n
        self.sent_to = [False] * n
        self.taken = [False] * n
        self.greater = [False] * n

    def copy(self) -> "CicClock":
        c = CicClock.__new__(CicClock)
        c.n, c.me, c.lc = self.n, self.me, self.lc
        c.ckpt = list(self.ckpt)
        c.sent_to = list(self.sent_to)
        c.taken = list(self.taken)
        c.greater = list(self.greater)
        return c

    def on_send(self, target: int) -> CicPiggyback:
        self.sent_to[target] = True
        return CicPiggyback(self.lc, tuple(self.ckpt), tuple(self.taken), tuple(self.greater))

    def should_force(self, pb: CicPiggyback, sender: int) -> bool:
        if pb is None:
            raise MissingPiggyback("data message without piggyback under CIC")
        me = self.me
        if pb.ckpt[me] == self.ckpt[me] and pb.taken[me]:
            return True
        if pb.lc > self.lc:
            if self.sent_to[sender]:
                return True
            g = pb.greater
            for k, sent in enumerate(self.sent_to):
                if sent and g[k]:
                    return True
        return False

    def on_checkpoint(self):
        me = self.me
        self.sent_to = [False] * self.n
        self.lc += 1
        self.ckpt[me] += 1
        self.taken = [k != me for k in range(self.n)]
        self.greater = [k != me for k in range(self.n)]

    def merge(self, pb: CicPiggyback):
        me = self.me
        if pb.lc > self.lc:
            self.lc = pb.lc
            self.greater = list(pb.greater)
            self.greater[me] = False
        elif pb.lc == self.lc:
            g = self.greater
            for k, v in enumerate(pb.greater):
                if not v:
                    g[k] = False
        ckpt, taken = self.ckpt, self.taken
        for k in range(self.n):
            if k == me:
                continue
            if pb.ckpt[k] > ckpt[k]:
                ckpt[k] = pb.ckpt[k]
                taken[k] = pb.taken[k]
            elif pb.ckpt[k] == ckpt[k] and pb.taken[k]:
                taken[k] = True


class CicProtocol(UncoordinatedProtocol):
    name = "CIC"

    def __init__(self, world):
        super().__init__(world)
        n = len(world.instances)
        self._pb = piggyback_size(n)
        for inst in world.instances:
            inst.clock = CicClock(n, inst.gid)

    def piggyback_bytes(self):
        return self._pb

    def on_send(self, inst, msg, dst):
        msg.piggyback = inst.clock.on_send(dst.gid)
        msg.pb_size = self._pb
        super().on_send(inst, msg, dst)

    def admit(self, inst, msg):
        verdict = super().admit(inst, msg)
        if verdict is not PROCESS:
            return verdict
        sender = self.world.channels[msg.cid].src.gid
        if inst.clock.should_force(msg.piggyback, sender):
            return FORCE
        return PROCESS

    def before_process(self, inst, msg):
        if msg.piggyback is None:
            raise MissingPiggyback(f"{inst.name}: message {msg.cid}/{msg.seq} lacks piggyback")
        inst.clock.merge(msg.piggyback)

    def on_checkpoint(self, inst, kind, index):
        inst.clock.on_checkpoint()
        if inst.clock.ckpt[inst.gid] != index:
            raise AssertionError(f"{inst.name}: ckpt[self]={inst.clock.ckpt[inst.gid]} but index={index}")
        if kind == "forced":
            self.world.metrics.forced_checkpoints += 1
            self.world.log("ForcedCheckpoint", f"inst={inst.name} index={index}")
            self.reset_trigger(inst)
        return inst.clock.copy()

    def on_restore(self, inst, cp):
        super().on_restore(inst, cp)
        n = len(self.world.instances)
        inst.clock = cp.protocol_meta.copy() if cp.protocol_meta is not None else CicClock(n, inst.gid)
