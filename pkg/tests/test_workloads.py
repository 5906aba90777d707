import math
from collections import Counter

import pytest

from streamckpt import run
from streamckpt.dataflow import OperatorState, size_of
from streamckpt.sim import SimConfig
from streamckpt.workloads.generators import (Bid, GeneratorConfig, Link, SourceNode, SourceRecord, bids,
                                             cyclic_events, dump_source_log, load_source_log,
                                             persons_and_auctions)
from streamckpt.workloads.logic import MapPrice, Reach, WindowCount, make_logic
from streamckpt.workloads.queries import QuerySpec, UnknownQuery, build_query, generate


def _flat(parts):
    return sorted((r for p in parts for r in p), key=lambda r: r.time)


def test_hot_ratio_count():
    cfg = GeneratorConfig(rate=1000, hot_ratio=0.3, seed=0)
    recs = _flat(bids(cfg, 10.0, 1))
    assert len(recs) == 10000
    hot = sum(1 for r in recs if r.payload.bidder == 0)
    assert 2800 <= hot <= 3200


def test_uniform_keys_within_three_sigma():
    n, universe = 10000, 10
    recs = _flat(bids(GeneratorConfig(rate=1000, seed=3, key_universe=universe), 10.0, 2))
    counts = Counter(r.payload.bidder for r in recs)
    p = 1 / universe
    sigma = math.sqrt(p * (1 - p) / n)
    assert len(counts) == universe
    assert max(counts.values()) / n - p <= 3 * sigma


def test_hot_sellers_in_auctions():
    _, auctions = persons_and_auctions(GeneratorConfig(rate=1000, hot_ratio=0.3, seed=1), 10.0, 1)
    sellers = Counter(r.payload.seller for r in auctions[0])
    assert sellers.most_common(1)[0][0] == 0
    assert sellers[0] / len(auctions[0]) > 0.3


def test_cyclic_event_frequencies():
    cfg = GeneratorConfig(rate=100, seed=0)
    events = cyclic_events(cfg, 10.0, count=1000)
    assert len(events) == 1000
    counts = Counter(kind for _, kind, _ in events)
    for kind, p in cfg.cyclic_probs.items():
        sigma = math.sqrt(p * (1 - p) / 1000)
        assert abs(counts[kind] / 1000 - p) <= 3 * sigma, kind


def test_cyclic_deletes_refer_to_live_items():
    alive_links, alive_src = set(), set()
    for _, kind, rec in cyclic_events(GeneratorConfig(rate=100, seed=2, node_universe=30), 20.0):
        if isinstance(rec, Link):
            if rec.delete:
                assert (rec.src, rec.dst) in alive_links
                alive_links.discard((rec.src, rec.dst))
            else:
                assert rec.src != rec.dst
                alive_links.add((rec.src, rec.dst))
        else:
            if rec.delete:
                assert rec.node in alive_src
                alive_src.discard(rec.node)
            else:
                alive_src.add(rec.node)


def test_generation_is_seeded():
    a = generate(QuerySpec("Q3", 2), GeneratorConfig(rate=200, seed=5), 2.0)
    b = generate(QuerySpec("Q3", 2), GeneratorConfig(rate=200, seed=5), 2.0)
    c = generate(QuerySpec("Q3", 2), GeneratorConfig(rate=200, seed=6), 2.0)
    assert a == b and a != c


@pytest.mark.parametrize("kw", [{"rate": 0}, {"hot_ratio": 1.0}, {"jitter": 1.0},
                                {"cyclic_probs": {"new_link": 0.5}}])
def test_generator_config_validation(kw):
    with pytest.raises(ValueError):
        GeneratorConfig(**kw)


def test_source_log_round_trip(tmp_path):
    streams = generate(QuerySpec("REACH", 2), GeneratorConfig(rate=100, seed=1), 1.0)
    p = tmp_path / "src.log"
    dump_source_log(p, streams)
    assert p.read_text().startswith("streamckpt-src v1\n")
    assert load_source_log(p) == streams


def test_map_price_multiplier():
    b = Bid(1, 2, 3, 1000, "x")
    (out,) = MapPrice(to="sink", multiplier=0.9).process(OperatorState(), 0, b)
    assert out[2].price == pytest.approx(900.0)


def test_q1_single_record_through_sim():
    q = build_query(QuerySpec("Q1", 1, multiplier=0.5))
    b = Bid(0, 7, 7, 4000, "x")
    res = run(q.graph, q.logic, {"bids": [[SourceRecord(0.1, b, size_of(b))]]}, SimConfig(horizon=1.0))
    assert res.world.sink_effect() == {b._replace(price=2000.0): 1}


def test_window_count_running_counts():
    logic = WindowCount(to="sink", window=1.0, n_inputs=1)
    st = OperatorState()
    outs = []
    for k in range(10):
        outs += logic.process(st, 0, Bid(k, 1, 42, 10, ""), event_time=0.05 * k)
    assert [o[2] for o in outs] == [(42, 0, n) for n in range(1, 11)]
    assert st.keyed_store[(0, 42)] == 10
    # the next window closes window 0 for the only input
    logic.process(st, 0, Bid(11, 1, 42, 10, ""), event_time=1.5)
    assert (0, 42) not in st.keyed_store


def _bfs_paths(links, origin, max_len):
    out, frontier = set(), [(origin,)]
    while frontier:
        path = frontier.pop()
        out.add(path)
        if len(path) >= max_len:
            continue
        for u, v in links:
            if u == path[-1] and v not in path:
                frontier.append(path + (v,))
    return out


@pytest.mark.parametrize("p", [1, 2])
def test_reach_tiny_graph_matches_bfs(p):
    A, B, C = 1, 2, 3
    q = build_query(QuerySpec("REACH", p))
    links = [SourceRecord(0.1, Link(0, A, B, False), 32), SourceRecord(0.2, Link(1, B, C, False), 32)]
    nodes = [SourceRecord(0.5, SourceNode(2, A, False), 17)]
    streams = {"links": [links] + [[] for _ in range(p - 1)], "nodes": [nodes] + [[] for _ in range(p - 1)]}
    res = run(q.graph, q.logic, streams, SimConfig(horizon=1.0))
    reached = [r for r in res.world.sink_effect() if isinstance(r, Reach)]
    # the origin is reachable from itself; the sink sees every extended path
    assert {A} | {r.node for r in reached} == {A, B, C}
    expected = {path for path in _bfs_paths([(A, B), (B, C)], A, 6) if len(path) > 1}
    assert {r.path for r in reached} == expected == {(A, B), (A, B, C)}


def test_unknown_query_and_logic():
    with pytest.raises(UnknownQuery):
        build_query(QuerySpec("Q99"))
    with pytest.raises(ValueError):
        make_logic("nope", {})
