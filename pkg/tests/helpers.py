"""Shared builders for tests: execution scripts, tiny graphs, random traces."""

from __future__ import annotations

import random

from streamckpt import build_graph
from streamckpt.dataflow import size_of
from streamckpt.recovery import CheckpointMeta, History, initial_meta
from streamckpt.workloads.generators import SourceRecord
from streamckpt.workloads.logic import make_logic


def play(owners, channels, script):
    """Run a script of ("ckpt", owner) / ("send", cid) / ("recv", cid) steps.

    Receives are FIFO per channel. Returns (checkpoint metadata per owner,
    History) -- the two independent views the recovery code works from.
    """
    hist = History(dict(channels))
    sent = {o: {} for o in owners}
    recvd = {o: {} for o in owners}
    cps = {o: [initial_meta(o)] for o in owners}
    next_recv = {cid: 1 for cid in channels}
    for o in owners:
        hist.add_owner(o)
    for step in script:
        op, arg = step
        if op == "ckpt":
            idx = hist.checkpoint(arg)
            cps[arg].append(CheckpointMeta(arg, idx, dict(sent[arg]), dict(recvd[arg])))
        elif op == "send":
            src = channels[arg][0]
            seq = sent[src].get(arg, 0) + 1
            sent[src][arg] = seq
            hist.send(arg, seq)
        elif op == "recv":
            dst = channels[arg][1]
            seq = next_recv[arg]
            next_recv[arg] += 1
            recvd[dst][arg] = seq
            hist.receive(arg, seq)
        else:
            raise ValueError(op)
    return cps, hist


def random_script(rng: random.Random, max_owners=4, max_ckpts=5, max_msgs=30):
    n = rng.randint(1, max_owners)
    owners = [f"p{k}" for k in range(n)]
    pairs = [(a, b) for a in owners for b in owners if a != b]
    rng.shuffle(pairs)
    pairs = pairs[: rng.randint(0, len(pairs))]
    channels = {cid: pr for cid, pr in enumerate(pairs)}
    budget_c = {o: rng.randint(0, max_ckpts) for o in owners}
    budget_m = rng.randint(0, max_msgs) if channels else 0
    pending = {cid: 0 for cid in channels}
    script = []
    while True:
        moves = [("ckpt", o) for o in owners if budget_c[o] > 0]
        if budget_m > 0:
            moves += [("send", cid) for cid in channels]
        moves += [("recv", cid) for cid, k in pending.items() if k > 0]
        if not moves:
            break
        op, arg = rng.choice(moves)
        if op == "ckpt":
            budget_c[arg] -= 1
        elif op == "send":
            budget_m -= 1
            pending[arg] += 1
        elif rng.random() < 0.85:  # leave some messages in flight
            pending[arg] -= 1
        else:
            continue
        script.append((op, arg))
    return owners, channels, script


def pingpong_graph(ping=1, pong=1, sources=1):
    """source -> ping <-> pong (feedback) with both exiting to a sink."""
    spec = {
        "operators": [
            {"name": "src", "parallelism": sources, "logic": "source", "params": {"to": "ping"}},
            {"name": "ping", "parallelism": ping, "logic": "bounce", "params": {"to": "pong", "exit": "sink"}},
            {"name": "pong", "parallelism": pong, "logic": "bounce", "params": {"to": "ping", "exit": "sink"}},
            {"name": "sink", "parallelism": 1, "logic": "sink", "stateful": True},
        ],
        "channels": [
            {"from": "src", "to": "ping", "kind": "forward" if sources == ping else "shuffle"},
            {"from": "ping", "to": "pong"},
            {"from": "pong", "to": "ping", "kind": "feedback"},
            {"from": "ping", "to": "sink"},
            {"from": "pong", "to": "sink"},
        ],
    }
    g = build_graph(spec)
    logic = {name: make_logic(op.logic, op.params) for name, op in g.operators.items()}
    return g, logic


def pingpong_run_inputs(seed: int, sources=1, horizon=3.0):
    """Random (rate, hops, interval) draw and the matching source streams."""
    rng = random.Random(f"pingpong:{seed}")
    rate = rng.uniform(20, 300)
    hops_max = rng.randint(1, 8)
    interval = rng.uniform(0.05, 0.5)
    recs, t, uid = [], 0.0, 0
    while True:
        t += rng.expovariate(rate)
        if t >= horizon:
            break
        p = (uid, rng.randint(0, hops_max))
        recs.append(SourceRecord(t, p, size_of(p)))
        uid += 1
    streams = {"src": [recs[k::sources] for k in range(sources)]}
    return streams, interval, horizon
