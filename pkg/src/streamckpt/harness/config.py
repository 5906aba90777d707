"""Run configuration files (``streamckpt-config v1``).

The first line is the version header; the rest is a YAML mapping with the
sections ``graph``, ``workload``, ``protocol``, ``cost``, ``failures`` and
``seed`` plus optional ``sweep``, ``mst`` and ``output``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace

import yaml

from ..sim import PROTOCOLS, ConfigInvalid, CostModel, FailureSpec
from ..workloads.queries import QUERY_IDS

CONFIG_HEADER = "streamckpt-config v1"


@dataclass
class WorkloadConfig:
    query: str = "Q1"
    parallelism: int = 4
    rate: float | None = 500.0  # records per time unit; None -> mst_fraction of the NONE MST
    mst_fraction: float | None = None
    hot_ratio: float = 0.0
    hot_set_size: int = 1
    key_universe: int = 1000
    node_universe: int = 1000
    jitter: float = 0.5
    window_length: float = 1.0
    multiplier: float = 0.9
    max_path_len: int = 6
    graph_file: str | None = None  # custom graph instead of a query analog
    source_log: str | None = None  # required with graph_file


@dataclass
class MstConfig:
    start_rate: float = 500.0
    min_rate: float = 1.0
    max_rate: float = 1e6
    resolution: float = 0.01
    horizon: float = 6.0
    warmup: float = 0.5
    throughput_ratio: float = 0.99
    latency_factor: float = 2.0


@dataclass
class RunSpec:
    workload: WorkloadConfig
    protocol: str = "NONE"
    interval: float = 1.0
    horizon: float = 10.0
    seed: int = 0
    failures: tuple = ()
    cost: CostModel = field(default_factory=CostModel)
    warmup: float = 0.5
    dedup: bool = True
    replay_policy: str = "receiver"
    z_check: bool = False

    def label(self) -> str:
        w = self.workload
        name = os.path.basename(w.graph_file) if w.graph_file else w.query
        fs = "-".join(f"{f.time:g}w{f.worker}" for f in self.failures) or "nofail"
        return f"{name}_{self.protocol}_p{w.parallelism}_h{w.hot_ratio:g}_{fs}_s{self.seed}"


@dataclass
class ExperimentConfig:
    base: RunSpec
    sweep: dict = field(default_factory=dict)
    mst: MstConfig = field(default_factory=MstConfig)
    output_dir: str = "reports"
    write_traces: bool = False
    workers: int = 1

    def cells(self) -> list[RunSpec]:
        """Cartesian product of the sweep axes over the base run."""
        protos = self.sweep.get("protocols") or [self.base.protocol]
        queries = self.sweep.get("queries") or [self.base.workload.query]
        pars = self.sweep.get("parallelism") or [self.base.workload.parallelism]
        hots = self.sweep.get("hot_ratio") or [self.base.workload.hot_ratio]
        scheds = self.sweep.get("failure_schedules")
        scheds = [tuple(s) for s in scheds] if scheds else [self.base.failures]
        out = []
        for q in queries:
            for p in pars:
                for h in hots:
                    for fs in scheds:
                        for pr in protos:
                            w = replace(self.base.workload, query=q, parallelism=p, hot_ratio=h)
                            out.append(replace(self.base, workload=w, protocol=pr, failures=fs))
        return out


def _only_known(cls, data: dict, section: str) -> dict:
    known = {f.name for f in fields(cls)}
    extra = set(data) - known
    if extra:
        raise ConfigInvalid(f"{section}: unknown keys {sorted(extra)}")
    return data


def _failures(raw) -> tuple:
    out = []
    for f in raw or ():
        try:
            out.append(FailureSpec(float(f["time"]), int(f["worker"])))
        except (KeyError, TypeError, ValueError):
            raise ConfigInvalid(f"failure entries need time and worker: {f!r}") from None
    return tuple(out)


def parse_config(text: str, base_dir: str = ".") -> ExperimentConfig:
    first, _, body = text.partition("\n")
    if first.strip() != CONFIG_HEADER:
        raise ConfigInvalid(f"expected header {CONFIG_HEADER!r}")
    try:
        data = yaml.safe_load(body) or {}
    except yaml.YAMLError as exc:
        raise ConfigInvalid(f"config is not valid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigInvalid("config body must be a mapping")
    allowed = {"graph", "workload", "protocol", "cost", "failures", "seed", "sweep", "mst", "output",
               "run"}
    extra = set(data) - allowed
    if extra:
        raise ConfigInvalid(f"unknown sections {sorted(extra)}")
    try:
        return _build(data, base_dir)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigInvalid):
            raise
        raise ConfigInvalid(str(exc)) from None


def _build(data: dict, base_dir: str) -> ExperimentConfig:
    graph = dict(data.get("graph") or {})
    wl = dict(data.get("workload") or {})
    if "file" in graph:
        wl["graph_file"] = os.path.join(base_dir, graph.pop("file"))
    if "query" in graph:
        wl["query"] = graph.pop("query")
    if "parallelism" in graph:
        wl["parallelism"] = graph.pop("parallelism")
    if graph:
        raise ConfigInvalid(f"graph: unknown keys {sorted(graph)}")
    run = dict(data.get("run") or {})
    horizon = float(wl.pop("horizon", run.pop("horizon", 10.0)))
    warmup = float(run.pop("warmup", 0.5))
    if wl.get("source_log"):
        wl["source_log"] = os.path.join(base_dir, wl["source_log"])
    workload = WorkloadConfig(**_only_known(WorkloadConfig, wl, "workload"))
    if workload.graph_file is None and workload.query not in QUERY_IDS:
        raise ConfigInvalid(f"unknown query {workload.query!r}")
    if workload.graph_file and not workload.source_log:
        raise ConfigInvalid("a custom graph file needs workload.source_log")
    if workload.rate is None and workload.mst_fraction is None:
        raise ConfigInvalid("workload needs rate or mst_fraction")

    proto = data.get("protocol") or {}
    if isinstance(proto, str):
        proto = {"name": proto}
    proto = dict(proto)
    name = str(proto.pop("name", "NONE")).upper()
    if name not in PROTOCOLS:
        raise ConfigInvalid(f"protocol must be one of {PROTOCOLS}")
    interval = float(proto.pop("interval", 1.0))
    dedup = bool(proto.pop("dedup", True))
    replay_policy = str(proto.pop("replay_policy", "receiver"))
    z_check = bool(proto.pop("z_check", False))
    if proto:
        raise ConfigInvalid(f"protocol: unknown keys {sorted(proto)}")

    cost_raw = dict(data.get("cost") or {})
    service = cost_raw.pop("service_time", None)
    cost = CostModel(**_only_known(CostModel, cost_raw, "cost"))
    if service:
        cost.service_time.update({str(k): float(v) for k, v in service.items()})
        cost.__post_init__()

    base = RunSpec(workload=workload, protocol=name, interval=interval, horizon=horizon,
                   seed=int(data.get("seed", 0)), failures=_failures(data.get("failures")),
                   cost=cost, warmup=warmup, dedup=dedup, replay_policy=replay_policy, z_check=z_check)

    sweep = dict(data.get("sweep") or {})
    bad = set(sweep) - {"protocols", "queries", "parallelism", "hot_ratio", "failure_schedules"}
    if bad:
        raise ConfigInvalid(f"sweep: unknown axes {sorted(bad)}")
    if "protocols" in sweep:
        sweep["protocols"] = [str(p).upper() for p in sweep["protocols"]]
        if not set(sweep["protocols"]) <= set(PROTOCOLS):
            raise ConfigInvalid(f"sweep.protocols must be within {PROTOCOLS}")
    if "failure_schedules" in sweep:
        sweep["failure_schedules"] = [_failures(s) for s in sweep["failure_schedules"]]
    mst = MstConfig(**_only_known(MstConfig, dict(data.get("mst") or {}), "mst"))
    out = dict(data.get("output") or {})
    return ExperimentConfig(
        base=base, sweep=sweep, mst=mst,
        output_dir=os.path.join(base_dir, str(out.get("dir", "reports"))),
        write_traces=bool(out.get("traces", False)),
        workers=int(out.get("workers", 1)),
    )


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        text = fh.read()
    return parse_config(text, os.path.dirname(os.path.abspath(path)))


def spec_to_dict(spec: RunSpec) -> dict:
    """JSON-friendly description of one run (embedded in traces for replay)."""
    from dataclasses import asdict

    d = asdict(spec)
    d["failures"] = [{"time": f.time, "worker": f.worker} for f in spec.failures]
    return d


def spec_from_dict(d: dict) -> RunSpec:
    d = dict(d)
    workload = WorkloadConfig(**d.pop("workload"))
    cost = CostModel(**d.pop("cost"))
    failures = _failures(d.pop("failures"))
    return RunSpec(workload=workload, cost=cost, failures=failures, **d)
