from collections import defaultdict

import pytest

from helpers import pingpong_graph, pingpong_run_inputs
from streamckpt import CyclicTopologyUnsupported, build_graph, run
from streamckpt.dataflow import size_of
from streamckpt.protocols.base import DISCARD, PROCESS, MissingPiggyback
from streamckpt.protocols.cic import CicClock, CicPiggyback, piggyback_size
from streamckpt.sim import SimConfig
from streamckpt.trace import parse_details
from streamckpt.workloads.generators import GeneratorConfig, SourceRecord
from streamckpt.workloads.queries import QuerySpec, build_query, generate


def _events(res):
    out = []
    for line in res.lines:
        t, tb, kind, details = line.rstrip("\n").split("\t")
        out.append((float(t), kind, parse_details(details)))
    return out


def _query_run(qid, p, protocol, rate=100.0, horizon=5.0, **kw):
    q = build_query(QuerySpec(qid, p))
    streams = generate(q.spec, GeneratorConfig(rate=rate, seed=kw.pop("seed", 0)), horizon)
    return run(q.graph, q.logic, streams, SimConfig(protocol=protocol, horizon=horizon, **kw))


# -- CIC clock -------------------------------------------------------------------


def test_piggyback_size_n40():
    assert piggyback_size(40) == 8 + 320 + 5 + 5 == 338


def test_sent_to_flips_one_bit_and_is_idempotent():
    c = CicClock(4, 0)
    c.on_send(2)
    assert c.sent_to == [False, False, True, False]
    c.on_send(2)
    assert c.sent_to == [False, False, True, False]


def _pb(n, lc, ckpt=None, taken=None, greater=None):
    return CicPiggyback(lc, tuple(ckpt or [0] * n), tuple(taken or [False] * n), tuple(greater or [False] * n))


def test_no_send_to_sender_never_forces():
    c = CicClock(3, 0)
    c.lc = 4
    assert not c.should_force(_pb(3, 9, greater=[True, True, True]), sender=1)


def test_reply_with_larger_clock_forces():
    c = CicClock(3, 0)
    c.lc = 4
    c.on_send(1)
    pb = _pb(3, 9)
    assert c.should_force(pb, sender=1)
    c.on_checkpoint()
    c.merge(pb)
    assert c.lc >= 9
    assert c.sent_to == [False] * 3


def test_smaller_clock_does_not_force():
    c = CicClock(2, 0)
    c.lc = 5
    c.on_send(1)
    assert not c.should_force(_pb(2, 5), sender=1)


def test_taken_on_own_interval_forces():
    c = CicClock(2, 0)
    assert c.should_force(_pb(2, 1, taken=[True, False]), sender=1)
    # a newer checkpoint of mine makes the knowledge stale
    c.on_checkpoint()
    assert not c.should_force(_pb(2, 1, taken=[True, False]), sender=1)


def test_checkpoints_advance_clock_and_index():
    c = CicClock(3, 1)
    c.on_checkpoint()  # forced
    c.on_checkpoint()  # local right after
    assert c.lc == 3 and c.ckpt[1] == 2


def test_missing_piggyback():
    with pytest.raises(MissingPiggyback):
        CicClock(2, 0).should_force(None, 1)


def test_cic_breaks_three_instance_z_pattern():
    # source -> ping -> pong -> ping ... a three-instance ring with replies
    for seed in range(10):
        g, logic = pingpong_graph()
        streams, interval, horizon = pingpong_run_inputs(seed)
        res = run(g, logic, streams, SimConfig(protocol="CIC", interval=interval, horizon=horizon,
                                               seed=seed, z_check=True))
        assert res.metrics.useless_checkpoints == 0


def test_cic_forced_ratio_below_half_on_acyclic():
    res = _query_run("Q3", 2, "CIC", rate=300, horizon=4.0, interval=0.5)
    total = len(res.metrics.checkpoints)
    assert total > 0 and res.metrics.forced_checkpoints / total < 0.5


# -- UNC -------------------------------------------------------------------------


def test_unc_distinct_phases():
    res = _query_run("Q1", 2, "UNC", horizon=2.0, interval=10.0)
    phases = [inst.phase for inst in res.world.instances]
    assert len(phases) == 6 and len(set(phases)) == 6
    assert all(0 <= ph < 10.0 for ph in phases)


def test_unc_idle_checkpoints_repeat_metadata():
    g = build_graph({"operators": [{"name": "s", "logic": "source", "params": {"to": "k"}},
                                   {"name": "k", "logic": "sink", "stateful": True}],
                     "channels": [{"from": "s", "to": "k"}]})
    from streamckpt.workloads.logic import make_logic
    logic = {n: make_logic(op.logic, op.params) for n, op in g.operators.items()}
    recs = [SourceRecord(0.01 * k, k, 8) for k in range(1, 8)]
    res = run(g, logic, {"s": [recs]}, SimConfig(protocol="UNC", interval=1.0, horizon=4.0))
    cps = res.world.store.checkpoints
    for owner, lst in cps.items():
        later = lst[1:]
        assert len(later) >= 3
        for a, b in zip(later, later[1:]):
            assert (a.last_sent, a.last_received) == (b.last_sent, b.last_received)
            assert a.size_bytes == b.size_bytes
    sink = [o for o in cps if o.operator_name == "k"][0]
    src = [o for o in cps if o.operator_name == "s"][0]
    assert cps[sink][1].last_received == {0: 7}
    assert cps[src][1].last_sent == {0: 7}


class _Inst:
    def __init__(self, last):
        self.last_received = {0: last}


class _Msg:
    def __init__(self, seq):
        self.cid, self.seq = 0, seq


def test_dedup_threshold():
    from types import SimpleNamespace
    from streamckpt.protocols.base import Protocol
    proto = Protocol(SimpleNamespace(cfg=SimpleNamespace(dedup=True)))
    inst = _Inst(5)
    assert [proto.admit(inst, _Msg(s)) for s in (4, 5, 6)] == [DISCARD, DISCARD, PROCESS]
    assert proto.admit(_Inst(0), _Msg(1)) == PROCESS


def test_unc_metadata_costs_control_bytes():
    res = _query_run("Q1", 2, "UNC", horizon=3.0, interval=0.5)
    assert res.metrics.control_bytes > 0
    assert res.metrics.piggyback_bytes == 0


# -- COOR ------------------------------------------------------------------------


@pytest.mark.parametrize("interval,rounds", [(5.0, 12), (10.0, 6)])
def test_coor_round_count(interval, rounds):
    res = _query_run("Q1", 2, "COOR", rate=20, horizon=60.0, interval=interval)
    starts = [e for e in _events(res) if e[1] == "RoundStart"]
    assert len(starts) == rounds
    assert len(res.metrics.rounds) == rounds
    assert res.metrics.skipped_rounds == 0
    # one round checkpoint per source instance per round
    per_src = defaultdict(int)
    for owner, _, kind, _, _ in res.metrics.checkpoints:
        if owner.operator_name == "bids":
            per_src[owner] += 1
    assert set(per_src.values()) == {rounds}


def test_coor_source_markers_per_channel():
    res = _query_run("Q3", 2, "COOR", horizon=2.0, interval=1.0)
    src_cids = {c.cid for c in res.world.graph.channels if c.src.operator_name == "persons"
                and c.src.index == 0}
    assert len(src_cids) == 2
    sent = [e[2] for e in _events(res) if e[1] == "SendMarker" and int(e[2]["cid"]) in src_cids]
    assert len([s for s in sent if s["round"] == "1"]) == 2


def test_coor_tiny_interval_skips_rounds():
    res = _query_run("Q3", 2, "COOR", rate=300, horizon=2.0, interval=0.001)
    assert res.metrics.skipped_rounds > 0
    assert len(res.metrics.rounds) > 0


def test_coor_single_operator_graph():
    g = build_graph({"operators": [{"name": "solo", "logic": "sink", "stateful": True}]})
    from streamckpt.workloads.logic import make_logic
    recs = [SourceRecord(0.1 * k, k, 8) for k in range(10)]
    res = run(g, {"solo": make_logic("sink", {})}, {"solo": [recs]},
              SimConfig(protocol="COOR", interval=0.5, horizon=2.0))
    assert len(res.metrics.rounds) == 4
    assert res.metrics.marker_bytes == 0


def test_coor_alignment_blocks_only_marked_channels():
    res = _query_run("Q3", 2, "COOR", rate=1500, horizon=3.0, interval=0.5)
    blocked = defaultdict(set)
    seqs = defaultdict(int)
    processed_while_blocked = 0
    for _, kind, f in _events(res):
        if kind == "MarkerProcessed":
            blocked[f["inst"]].add(f["cid"])
        elif kind == "SnapshotStart":
            blocked[f["inst"]].clear()
        elif kind == "Process":
            assert f["cid"] not in blocked[f["inst"]]
            if blocked[f["inst"]]:
                processed_while_blocked += 1
            # buffered data is still delivered in channel order
            assert int(f["seq"]) == seqs[f["cid"]] + 1
            seqs[f["cid"]] = int(f["seq"])
    assert processed_while_blocked > 0
    assert res.metrics.blocked_time > 0


def test_coor_failure_mid_round_uses_committed_round():
    res = _query_run("Q3", 2, "COOR", rate=300, horizon=4.0, interval=0.5, failures=((2.5001, 1),))
    (rec,) = res.metrics.recoveries
    committed = {r["round"] for r in res.metrics.rounds if r["complete"] <= rec["failure_time"]}
    assert set(rec["line"].values()) == {max(committed)}
    assert rec["invalid"] == 0


def test_coor_rejects_cyclic_query():
    with pytest.raises(CyclicTopologyUnsupported):
        _query_run("REACH", 2, "COOR", horizon=1.0)
