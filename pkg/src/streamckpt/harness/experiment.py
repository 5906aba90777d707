"""Cells, maximum-sustainable-throughput search and experiment matrices."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from ..dataflow import load_graph_file
from ..protocols.base import CyclicTopologyUnsupported
from ..sim import ConfigInvalid, SimConfig, run
from ..trace import hash_hex, write_trace
from ..workloads.generators import GeneratorConfig, load_source_log
from ..workloads.logic import make_logic
from ..workloads.queries import QuerySpec, build_query, generate
from .config import ExperimentConfig, MstConfig, RunSpec, spec_to_dict
from .metrics import MetricsReport, build_report, window_p50

REPORT_HEADER = "streamckpt-report v1"


class NeverSustainable(ConfigInvalid):
    pass


def prepare_inputs(spec: RunSpec, rate: float | None = None, horizon: float | None = None):
    """(graph, logic bindings, source streams) for one run."""
    w = spec.workload
    horizon = spec.horizon if horizon is None else horizon
    if w.graph_file:
        graph = load_graph_file(w.graph_file)
        logic = {name: make_logic(op.logic, op.params) for name, op in graph.operators.items()}
        return graph, logic, load_source_log(w.source_log)
    qspec = QuerySpec(w.query, w.parallelism, w.window_length, w.multiplier, w.max_path_len)
    q = build_query(qspec)
    gcfg = GeneratorConfig(rate=rate if rate is not None else w.rate, hot_ratio=w.hot_ratio,
                           seed=spec.seed, key_universe=w.key_universe, hot_set_size=w.hot_set_size,
                           jitter=w.jitter, node_universe=w.node_universe)
    return q.graph, q.logic, generate(qspec, gcfg, horizon)


def sim_config(spec: RunSpec, **kw) -> SimConfig:
    base = dict(protocol=spec.protocol, interval=spec.interval, horizon=spec.horizon, seed=spec.seed,
                failures=spec.failures, cost=spec.cost, dedup=spec.dedup,
                replay_policy=spec.replay_policy, z_check=spec.z_check)
    base.update(kw)
    return SimConfig(**base)


def run_spec(spec: RunSpec, trace: bool = True, history: bool = True):
    """Run one cell; returns (MetricsReport, RunResult)."""
    if spec.workload.rate is None:
        raise ConfigInvalid("run_spec needs an absolute rate (resolve mst_fraction first)")
    graph, logic, streams = prepare_inputs(spec)
    res = run(graph, logic, streams, sim_config(spec, trace=trace, history=history))
    w = spec.workload
    report = build_report(
        res.metrics, query=w.query if not w.graph_file else os.path.basename(w.graph_file),
        protocol=spec.protocol, parallelism=w.parallelism, rate=w.rate, hot_ratio=w.hot_ratio,
        seed=spec.seed, horizon=spec.horizon, interval=spec.interval, warmup=spec.warmup,
        trace_hash=hash_hex(res.trace_hash) if res.trace_hash is not None else None,
        sink_results=sum(res.world.sink_effect().values()),
    )
    return report, res


def baseline_bytes(spec: RunSpec) -> int:
    """Total transmitted bytes of the failure-free NONE run of the same workload."""
    base = replace(spec, protocol="NONE", failures=())
    graph, logic, streams = prepare_inputs(base)
    return run(graph, logic, streams, sim_config(base, trace=False, history=False)).metrics.total_bytes


def with_overhead(report: MetricsReport, spec: RunSpec) -> MetricsReport:
    none_bytes = baseline_bytes(spec)
    report.message_overhead_ratio = report.total_bytes / none_bytes if none_bytes else None
    return report


# -- maximum sustainable throughput ------------------------------------------------


@dataclass
class Probe:
    rate: float
    sustainable: bool
    throughput: float
    p50_first: float | None
    p50_last: float | None


def probe_rate(spec: RunSpec, rate: float, mst: MstConfig) -> Probe:
    s = replace(spec, horizon=mst.horizon, failures=(), workload=replace(spec.workload, rate=rate))
    graph, logic, streams = prepare_inputs(s, rate=rate, horizon=mst.horizon)
    res = run(graph, logic, streams, sim_config(s, trace=False, history=False))
    m = res.metrics
    lo, hi = mst.warmup * mst.horizon, mst.horizon
    offered = sum(1 for recs in streams.values() for part in recs for r in part if lo <= r.time < hi)
    # processed throughput: source records handled by the first stage (sources
    # that are also sinks have no first stage, their reads are the processing)
    done = m.ingested if m.ingested else m.consumed
    consumed = sum(1 for t in done if lo <= t < hi)
    span = hi - lo
    q = span / 4
    first = window_p50(m.latencies, lo, lo + q)
    last = window_p50(m.latencies, hi - q, hi)
    ok = offered > 0 and consumed >= mst.throughput_ratio * offered
    if ok and first is not None:
        ok = last is not None and last <= mst.latency_factor * first
    return Probe(rate, ok, consumed / span, first, last)


def measure_mst(spec: RunSpec, mst: MstConfig | None = None):
    """Highest sustainable input rate (within ``mst.resolution``) and the probes used."""
    mst = mst or MstConfig()
    probes = []

    def ok(r):
        p = probe_rate(spec, r, mst)
        probes.append(p)
        return p.sustainable

    r = mst.start_rate
    if ok(r):
        lo = r
        hi = None
        while hi is None:
            r = lo * 2
            if r > mst.max_rate:
                return lo, probes
            if ok(r):
                lo = r
            else:
                hi = r
    else:
        hi = r
        lo = None
        while lo is None:
            r = hi / 2
            if r < mst.min_rate:
                raise NeverSustainable(f"{spec.label()}: not sustainable even at {r:g}")
            if ok(r):
                lo = r
            else:
                hi = r
    while (hi - lo) / lo > mst.resolution:
        mid = (lo + hi) / 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo, probes


# -- matrices and report files --------------------------------------------------------


def _atomic_write(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def report_json(report: MetricsReport | None, spec: RunSpec, error: str | None = None) -> str:
    body = {"header": REPORT_HEADER, "cell": spec.label(), "config": spec_to_dict(spec),
            "status": "failed" if error else "ok", "error": error,
            "metrics": report.to_dict() if report is not None else None}
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


SUMMARY_FIELDS = [
    "cell", "status", "query", "protocol", "parallelism", "hot_ratio", "rate", "p50", "p99",
    "avg_checkpoint_time", "restart_time", "recovery_time", "total_checkpoints", "invalid_checkpoints",
    "forced_checkpoints", "skipped_rounds", "message_overhead_ratio", "mst", "mst_normalized",
    "trace_hash",
]


def summary_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write("# " + REPORT_HEADER + "\n")
    wr = csv.DictWriter(buf, fieldnames=SUMMARY_FIELDS, extrasaction="ignore", lineterminator="\n")
    wr.writeheader()
    for r in rows:
        wr.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in SUMMARY_FIELDS})
    return buf.getvalue()


def _resolve_rate(spec: RunSpec, cfg: ExperimentConfig, cache: dict) -> RunSpec:
    w = spec.workload
    if w.rate is not None and w.mst_fraction is None:
        return spec
    key = (w.query, w.parallelism, w.graph_file)
    if key not in cache:
        base = replace(spec, protocol="NONE", workload=replace(w, hot_ratio=0.0))
        cache[key] = measure_mst(base, cfg.mst)[0]
    return replace(spec, workload=replace(w, rate=round(w.mst_fraction * cache[key], 6)))


def run_cell(spec: RunSpec, cfg: ExperimentConfig, with_mst: bool = False, baseline_mst=None):
    report, res = run_spec(spec, trace=cfg.write_traces)
    with_overhead(report, spec)
    if with_mst:
        report.mst = measure_mst(spec, cfg.mst)[0]
        if baseline_mst:
            report.mst_normalized = report.mst / baseline_mst
    if cfg.write_traces and res.lines is not None:
        write_trace(os.path.join(cfg.output_dir, spec.label() + ".trace"), res.lines, spec_to_dict(spec))
    return report


def run_experiment(cfg: ExperimentConfig, with_mst: bool = False) -> list[dict]:
    """Run every cell of the matrix; one JSON report per cell plus summary.csv.

    A cell that raises is reported as failed and the matrix continues.
    """
    rate_cache: dict = {}
    cells = [_resolve_rate(s, cfg, rate_cache) for s in cfg.cells()]
    base_mst: dict = {}
    if with_mst:
        for s in cells:
            key = (s.workload.query, s.workload.parallelism, s.workload.hot_ratio)
            if key not in base_mst:
                none = replace(s, protocol="NONE", failures=())
                base_mst[key] = measure_mst(none, cfg.mst)[0]

    def one(spec: RunSpec):
        key = (spec.workload.query, spec.workload.parallelism, spec.workload.hot_ratio)
        try:
            rep = run_cell(spec, cfg, with_mst, base_mst.get(key))
            err = None
        except CyclicTopologyUnsupported as exc:
            rep, err = None, f"CyclicTopologyUnsupported: {exc}"
        except Exception as exc:  # cell marked failed, matrix continues
            rep, err = None, f"{type(exc).__name__}: {exc}"
        _atomic_write(os.path.join(cfg.output_dir, spec.label() + ".json"), report_json(rep, spec, err))
        row = {"cell": spec.label(), "status": "failed" if err else "ok"}
        if rep is not None:
            row.update(rep.to_dict())
        else:
            row.update(query=spec.workload.query, protocol=spec.protocol,
                       parallelism=spec.workload.parallelism, hot_ratio=spec.workload.hot_ratio)
        return row

    with ThreadPoolExecutor(max_workers=max(1, cfg.workers)) as pool:
        rows = list(pool.map(one, cells))
    _atomic_write(os.path.join(cfg.output_dir, "summary.csv"), summary_csv(rows))
    return rows
