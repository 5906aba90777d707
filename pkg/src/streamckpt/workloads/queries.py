"""Query analogs: Q1, Q3, Q8, Q12 and the cyclic reachability query."""

from __future__ import annotations

from dataclasses import dataclass

from ..dataflow import BROADCAST, FEEDBACK, FORWARD, SHUFFLE, DataflowGraph, build_graph
from . import generators as gen
from .logic import make_logic

QUERY_IDS = ("Q1", "Q3", "Q8", "Q12", "REACH")


class UnknownQuery(ValueError):
    pass


@dataclass
class QuerySpec:
    id: str
    parallelism: int = 1
    window_length: float = 1.0
    multiplier: float = 0.9
    max_path_len: int = 6


@dataclass
class Query:
    spec: QuerySpec
    graph: DataflowGraph
    logic: dict  # operator name -> Logic
    streams: dict | None = None  # source operator -> partitions -> records


def _ops(*entries):
    return [dict(zip(("name", "parallelism", "logic", "stateful", "params"), e)) for e in entries]


def _chans(*entries):
    return [{"from": a, "to": b, "kind": k} for a, b, k in entries]


def query_graph_spec(spec: QuerySpec) -> dict:
    p = spec.parallelism
    if spec.id == "Q1":
        ops = _ops(
            ("bids", p, "source", False, {"to": "map"}),
            ("map", p, "map_price", False, {"to": "sink", "multiplier": spec.multiplier}),
            ("sink", p, "sink", True, {}),
        )
        chans = _chans(("bids", "map", FORWARD), ("map", "sink", FORWARD))
    elif spec.id == "Q3":
        ops = _ops(
            ("persons", p, "source", False, {"to": "join", "key": "id"}),
            ("auctions", p, "source", False, {"to": "join", "key": "seller"}),
            ("join", p, "inc_join", True, {"to": "sink"}),
            ("sink", p, "sink", True, {}),
        )
        chans = _chans(("persons", "join", SHUFFLE), ("auctions", "join", SHUFFLE),
                       ("join", "sink", FORWARD))
    elif spec.id == "Q8":
        ops = _ops(
            ("persons", p, "source", False, {"to": "join", "key": "id"}),
            ("auctions", p, "source", False, {"to": "join", "key": "seller"}),
            ("join", p, "window_join", True,
             {"to": "sink", "window": spec.window_length, "n_inputs": 2 * p}),
            ("sink", p, "sink", True, {}),
        )
        chans = _chans(("persons", "join", SHUFFLE), ("auctions", "join", SHUFFLE),
                       ("join", "sink", FORWARD))
    elif spec.id == "Q12":
        ops = _ops(
            ("bids", p, "source", False, {"to": "count", "key": "bidder"}),
            ("count", p, "window_count", True,
             {"to": "sink", "window": spec.window_length, "n_inputs": p}),
            ("sink", p, "sink", True, {}),
        )
        chans = _chans(("bids", "count", SHUFFLE), ("count", "sink", FORWARD))
    elif spec.id == "REACH":
        ops = _ops(
            ("links", p, "reach_links_source", False, {"to": "join"}),
            ("nodes", p, "reach_nodes_source", False, {"to": "join"}),
            ("join", p, "reach_join", True, {"to": "select"}),
            ("select", p, "reach_select", False, {"to": "project", "max_path_len": spec.max_path_len}),
            ("project", p, "reach_project", False, {"to": "sink", "feedback": "join"}),
            ("sink", p, "sink", True, {}),
        )
        chans = _chans(("links", "join", SHUFFLE), ("nodes", "join", BROADCAST),
                       ("join", "select", FORWARD), ("select", "project", FORWARD),
                       ("project", "sink", SHUFFLE), ("project", "join", FEEDBACK))
    else:
        raise UnknownQuery(spec.id)
    return {"operators": ops, "channels": chans}


def build_query(spec: QuerySpec) -> Query:
    graph = build_graph(query_graph_spec(spec))
    logic = {name: make_logic(op.logic, op.params) for name, op in graph.operators.items()}
    return Query(spec, graph, logic)


def generate(spec: QuerySpec, cfg: gen.GeneratorConfig, horizon: float) -> dict:
    """Input log per source operator for ``spec``: operator -> partitions -> records."""
    p = spec.parallelism
    if spec.id in ("Q1", "Q12"):
        return {"bids": gen.bids(cfg, horizon, p)}
    if spec.id in ("Q3", "Q8"):
        persons, auctions = gen.persons_and_auctions(cfg, horizon, p)
        return {"persons": persons, "auctions": auctions}
    if spec.id == "REACH":
        links, nodes = gen.reachability(cfg, horizon, p)
        return {"links": links, "nodes": nodes}
    raise UnknownQuery(spec.id)
