"""Operator logic for the query analogs.

A logic object is stateless itself; all mutable data lives in the
``OperatorState`` handed to ``process``. Outputs are ``(target, route, payload)``
triples where ``route`` is ``None`` (single/forward channel), ``ALL`` or a key
that is hashed onto the target's parallelism.
"""

from __future__ import annotations

from typing import Any, NamedTuple

from .generators import Auction, Bid, Link, Person, SourceNode

ALL = object()
PROGRESS = "__progress__"


class Reach(NamedTuple):
    origin: int
    node: int
    path: tuple


class Pair(NamedTuple):
    origin: int
    path: tuple
    dst: int


class Logic:
    stateful = False

    def __init__(self, **params):
        self.params = params
        self.to = params.get("to")

    def process(self, state, src, payload, event_time=None) -> list:
        raise NotImplementedError


class SourceLogic(Logic):
    """Reads the input log; routes each record by ``key`` (a field name) or forward."""

    def process(self, state, src, payload, event_time=None):
        key = self.params.get("key")
        return [(self.to, getattr(payload, key) if key else None, payload)]


class IdentityLogic(Logic):
    def process(self, state, src, payload, event_time=None):
        return [(self.to, None, payload)]


class MapPrice(Logic):
    """Q1: rewrite the bid price by a constant multiplier; no shuffle."""

    def process(self, state, src, payload: Bid, event_time=None):
        mult = self.params.get("multiplier", 0.9)
        return [(self.to, None, payload._replace(price=payload.price * mult))]


class Sink(Logic):
    """Counts every result it receives; the keyed store is the sink effect."""

    stateful = True

    def process(self, state, src, payload, event_time=None):
        store = state.keyed_store
        store[payload] = store.get(payload, 0) + 1
        return []


def _join_row(p: Person, a: Auction):
    return (p.id, p.name, p.city, a.id, a.category)


class IncrementalJoin(Logic):
    """Q3: persons join auctions on person id == seller, state kept forever."""

    stateful = True

    def process(self, state, src, payload, event_time=None):
        if isinstance(payload, Person):
            key = payload.id
        else:
            key = payload.seller
        return self._join(state.keyed_store, key, payload)

    def _join(self, store, key, payload):
        slot = store.get(key)
        if slot is None:
            slot = store[key] = {"p": {}, "a": {}}
        out = []
        if isinstance(payload, Person):
            slot["p"][payload.uid] = payload
            for a in slot["a"].values():
                out.append((self.to, None, _join_row(payload, a)))
        else:
            slot["a"][payload.uid] = payload
            for p in slot["p"].values():
                out.append((self.to, None, _join_row(p, payload)))
        return out


class _Windowed(Logic):
    """Tumbling windows over ingestion time with running emission.

    A window is purged once every input channel has delivered a record from a
    later window; per-channel FIFO makes that the point where no more records
    for it can arrive.
    """

    stateful = True

    def window_of(self, t: float) -> int:
        return int(t // self.params.get("window", 1.0))

    def advance(self, store, src, window: int):
        prog = store.get(PROGRESS)
        if prog is None:
            prog = store[PROGRESS] = {}
        if prog.get(src, -1) >= window:
            return
        old_low = min(prog.values()) if len(prog) == self.params["n_inputs"] else -1
        prog[src] = window
        if len(prog) < self.params["n_inputs"]:
            return
        low = min(prog.values())
        if low > old_low:
            for k in [k for k in store if k != PROGRESS and k[0] < low]:
                del store[k]


class WindowJoin(_Windowed):
    """Q8: persons join auctions within the same tumbling window."""

    def process(self, state, src, payload, event_time=None):
        w = self.window_of(event_time)
        store = state.keyed_store
        key = (w, payload.id if isinstance(payload, Person) else payload.seller)
        slot = store.get(key)
        if slot is None:
            slot = store[key] = {"p": {}, "a": {}}
        out = []
        if isinstance(payload, Person):
            slot["p"][payload.uid] = payload
            for a in slot["a"].values():
                out.append((self.to, None, (w,) + _join_row(payload, a)))
        else:
            slot["a"][payload.uid] = payload
            for p in slot["p"].values():
                out.append((self.to, None, (w,) + _join_row(p, payload)))
        self.advance(store, src, w)
        return out


class WindowCount(_Windowed):
    """Q12: running count of bids per bidder per tumbling window."""

    def process(self, state, src, payload: Bid, event_time=None):
        w = self.window_of(event_time)
        store = state.keyed_store
        key = (w, payload.bidder)
        n = store.get(key, 0) + 1
        store[key] = n
        self.advance(store, src, w)
        return [(self.to, None, (payload.bidder, w, n))]


class ReachNodesSource(Logic):
    def process(self, state, src, payload: SourceNode, event_time=None):
        if payload.delete:
            return [(self.to, ALL, ("del_source", payload.node))]
        return [(self.to, payload.node, Reach(payload.node, payload.node, (payload.node,)))]


class ReachLinksSource(Logic):
    def process(self, state, src, payload: Link, event_time=None):
        if payload.delete:
            return [(self.to, payload.src, ("del_link", payload.src, payload.dst))]
        return [(self.to, payload.src, ("link", payload.src, payload.dst))]


class ReachJoin(Logic):
    """Joins links with reached paths on the link's start node."""

    stateful = True

    def process(self, state, src, payload, event_time=None):
        store = state.keyed_store
        if isinstance(payload, Reach):
            slot = store.setdefault(payload.node, {"l": {}, "p": {}})
            slot["p"][(payload.origin, payload.path)] = True
            return [(self.to, None, Pair(payload.origin, payload.path, v)) for v in slot["l"]]
        tag = payload[0]
        if tag == "link":
            _, u, v = payload
            slot = store.setdefault(u, {"l": {}, "p": {}})
            slot["l"][v] = True
            return [(self.to, None, Pair(o, path, v)) for (o, path) in slot["p"]]
        if tag == "del_link":
            _, u, v = payload
            slot = store.get(u)
            if slot is not None:
                slot["l"].pop(v, None)
            return []
        if tag == "del_source":
            origin = payload[1]
            for slot in store.values():
                for k in [k for k in slot["p"] if k[0] == origin]:
                    del slot["p"][k]
            return []
        raise ValueError(f"unexpected record {payload!r}")


class ReachSelect(Logic):
    """Drops pairs whose link end is already on the path (or the path is too long)."""

    def process(self, state, src, payload: Pair, event_time=None):
        if payload.dst in payload.path:
            return []
        if len(payload.path) >= self.params.get("max_path_len", 6):
            return []
        return [(self.to, None, payload)]


class ReachProject(Logic):
    """Builds the extended path; sends it to the sink and back to the join."""

    def process(self, state, src, payload: Pair, event_time=None):
        r = Reach(payload.origin, payload.dst, payload.path + (payload.dst,))
        return [(self.to, r.node, r), (self.params["feedback"], r.node, r)]


class Bounce(Logic):
    """Test workload: forwards a (uid, hops) record around a feedback loop."""

    def process(self, state, src, payload, event_time=None):
        uid, hops = payload[0], payload[1]
        if hops <= 0:
            return [(self.params["exit"], None, (uid, 0))]
        return [(self.to, uid * 31 + hops, (uid, hops - 1))]


LOGIC = {
    "source": SourceLogic,
    "identity": IdentityLogic,
    "map_price": MapPrice,
    "sink": Sink,
    "inc_join": IncrementalJoin,
    "window_join": WindowJoin,
    "window_count": WindowCount,
    "reach_nodes_source": ReachNodesSource,
    "reach_links_source": ReachLinksSource,
    "reach_join": ReachJoin,
    "reach_select": ReachSelect,
    "reach_project": ReachProject,
    "bounce": Bounce,
}

EVENT_TIME_LOGIC = (WindowJoin, WindowCount)


def make_logic(name: str, params: dict) -> Logic:
    try:
        cls = LOGIC[name]
    except KeyError:
        raise ValueError(f"unknown logic {name!r}") from None
    return cls(**params)


def needs_event_time(logic: Any) -> bool:
    return isinstance(logic, EVENT_TIME_LOGIC)
