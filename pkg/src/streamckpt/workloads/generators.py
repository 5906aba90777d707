"""Seeded input generators for the NexMark-like streams and the reachability stream."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Any, NamedTuple

from ..dataflow import size_of

SRC_HEADER = "streamckpt-src v1"

DEFAULT_CYCLIC_PROBS = {"new_link": 0.60, "new_source": 0.15, "delete_link": 0.20, "delete_source": 0.05}

_EXTRA = "x" * 64


class Bid(NamedTuple):
    uid: int
    auction: int
    bidder: int
    price: int
    extra: str


class Person(NamedTuple):
    uid: int
    id: int
    name: str
    city: str


class Auction(NamedTuple):
    uid: int
    id: int
    seller: int
    category: int
    extra: str


class Link(NamedTuple):
    uid: int
    src: int
    dst: int
    delete: bool


class SourceNode(NamedTuple):
    uid: int
    node: int
    delete: bool


RECORD_TYPES = {cls.__name__: cls for cls in (Bid, Person, Auction, Link, SourceNode)}


class SourceRecord(NamedTuple):
    time: float
    payload: Any
    size: int


@dataclass
class GeneratorConfig:
    rate: float = 100.0
    hot_ratio: float = 0.0
    seed: int = 0
    key_universe: int = 1000
    hot_set_size: int = 1
    jitter: float = 0.5
    cyclic_probs: dict = field(default_factory=lambda: dict(DEFAULT_CYCLIC_PROBS))
    node_universe: int = 1000

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("rate must be > 0")
        if not 0 <= self.hot_ratio < 1:
            raise ValueError("hot_ratio must be in [0, 1)")
        if not 0 <= self.jitter < 1:
            raise ValueError("jitter must be in [0, 1)")
        if abs(sum(self.cyclic_probs.values()) - 1.0) > 1e-9:
            raise ValueError("cyclic_probs must sum to 1")


def arrival_times(rate: float, horizon: float, jitter: float, rng: random.Random) -> list[float]:
    """Nominal spacing 1/rate, each arrival displaced by up to +-jitter/2 slots."""
    times = []
    k = 0
    while True:
        t = (k + 0.5 + (rng.random() - 0.5) * jitter) / rate
        if t >= horizon:
            break
        times.append(t)
        k += 1
    return times


def pick_key(rng: random.Random, cfg: GeneratorConfig, universe: int) -> int:
    if cfg.hot_ratio > 0 and rng.random() < cfg.hot_ratio:
        return rng.randrange(min(cfg.hot_set_size, universe))
    return rng.randrange(universe)


def _split(records: list[SourceRecord], partitions: int) -> list[list[SourceRecord]]:
    out = [[] for _ in range(partitions)]
    for k, rec in enumerate(records):
        out[k % partitions].append(rec)
    return out


def _rng(cfg: GeneratorConfig, stream: str) -> random.Random:
    return random.Random(f"{cfg.seed}:{stream}")


def bids(cfg: GeneratorConfig, horizon: float, partitions: int) -> list[list[SourceRecord]]:
    rng = _rng(cfg, "bids")
    recs = []
    for uid, t in enumerate(arrival_times(cfg.rate, horizon, cfg.jitter, rng)):
        b = Bid(uid, rng.randrange(cfg.key_universe), pick_key(rng, cfg, cfg.key_universe),
                rng.randrange(100, 100_000), _EXTRA)
        recs.append(SourceRecord(t, b, size_of(b)))
    return _split(recs, partitions)


def persons_and_auctions(cfg: GeneratorConfig, horizon: float, partitions: int,
                         person_share: float = 0.25):
    """Two streams; auction sellers refer to persons (hot sellers under skew)."""
    rng_p = _rng(cfg, "persons")
    rng_a = _rng(cfg, "auctions")
    p_rate = cfg.rate * person_share
    a_rate = cfg.rate - p_rate
    persons = []
    for uid, t in enumerate(arrival_times(p_rate, horizon, cfg.jitter, rng_p)):
        p = Person(uid, uid, f"person{uid % 997:03d}", f"city{rng_p.randrange(50):02d}")
        persons.append(SourceRecord(t, p, size_of(p)))
    auctions = []
    for uid, t in enumerate(arrival_times(a_rate, horizon, cfg.jitter, rng_a)):
        known = max(1, int(p_rate * t))
        a = Auction(uid, uid, pick_key(rng_a, cfg, known), rng_a.randrange(20), _EXTRA)
        auctions.append(SourceRecord(t, a, size_of(a)))
    return _split(persons, partitions), _split(auctions, partitions)


def cyclic_events(cfg: GeneratorConfig, horizon: float, count: int | None = None):
    """Event kinds drawn with ``cfg.cyclic_probs``; returns (time, kind, record) triples.

    Deletions pick a currently alive link/source; if none is alive the event
    falls back to the matching creation.
    """
    rng = _rng(cfg, "cyclic")
    kinds = list(cfg.cyclic_probs)
    weights = [cfg.cyclic_probs[k] for k in kinds]
    if count is not None:
        times = [(k + 0.5) / cfg.rate for k in range(count)]
    else:
        times = arrival_times(cfg.rate, horizon, cfg.jitter, rng)
    links: list[tuple[int, int]] = []
    link_set: set[tuple[int, int]] = set()
    sources: list[int] = []
    source_set: set[int] = set()
    out = []
    for uid, t in enumerate(times):
        kind = rng.choices(kinds, weights)[0]
        if kind == "delete_link" and not links:
            kind = "new_link"
        if kind == "delete_source" and not sources:
            kind = "new_source"
        if kind == "new_link":
            u = rng.randrange(cfg.node_universe)
            v = rng.randrange(cfg.node_universe - 1)
            v = v + 1 if v >= u else v
            if (u, v) not in link_set:
                link_set.add((u, v))
                links.append((u, v))
            rec = Link(uid, u, v, False)
        elif kind == "delete_link":
            u, v = links.pop(rng.randrange(len(links)))
            link_set.discard((u, v))
            rec = Link(uid, u, v, True)
        elif kind == "new_source":
            n = rng.randrange(cfg.node_universe)
            if n not in source_set:
                source_set.add(n)
                sources.append(n)
            rec = SourceNode(uid, n, False)
        else:
            n = sources.pop(rng.randrange(len(sources)))
            source_set.discard(n)
            rec = SourceNode(uid, n, True)
        out.append((t, kind, rec))
    return out


def reachability(cfg: GeneratorConfig, horizon: float, partitions: int):
    links, nodes = [], []
    for t, _, rec in cyclic_events(cfg, horizon):
        target = links if isinstance(rec, Link) else nodes
        target.append(SourceRecord(t, rec, size_of(rec)))
    return _split(links, partitions), _split(nodes, partitions)


def dump_source_log(path, streams: dict[str, list[list[SourceRecord]]]) -> None:
    """Write ``streams`` (operator -> partitions -> records) as a replayable log."""
    with open(path, "w") as fh:
        fh.write(SRC_HEADER + "\n")
        for op in sorted(streams):
            for part, recs in enumerate(streams[op]):
                for off, r in enumerate(recs):
                    body = json.dumps([type(r.payload).__name__, list(r.payload)])
                    fh.write(f"{op}\t{part}\t{off}\t{r.time!r}\t{body}\n")


def load_source_log(path) -> dict[str, list[list[SourceRecord]]]:
    out: dict[str, list[list[SourceRecord]]] = {}
    with open(path) as fh:
        header = fh.readline().strip()
        if header != SRC_HEADER:
            raise ValueError(f"expected header {SRC_HEADER!r}")
        for line in fh:
            op, part, off, t, body = line.rstrip("\n").split("\t")
            name, fields = json.loads(body)
            fields = [tuple(f) if isinstance(f, list) else f for f in fields]
            payload = RECORD_TYPES[name](*fields)
            parts = out.setdefault(op, [])
            while len(parts) <= int(part):
                parts.append([])
            if int(off) != len(parts[int(part)]):
                raise ValueError(f"non-contiguous offset {off} in {op}[{part}]")
            parts[int(part)].append(SourceRecord(float(t), payload, size_of(payload)))
    return out
