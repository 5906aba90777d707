"""Run-level metrics computed from ``MetricsRaw``."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field


class EmptyBucket(ValueError):
    pass


def nearest_rank(sorted_values, p: float):
    """Nearest-rank percentile of an already sorted sequence."""
    if not sorted_values:
        raise EmptyBucket("no samples")
    rank = max(1, math.ceil(p / 100.0 * len(sorted_values)))
    return sorted_values[rank - 1]


def latency_series(latencies, bucket: float = 1.0) -> list:
    """Per-bucket (start, p50, p99, count); empty buckets are gaps (omitted)."""
    buckets: dict[int, list] = {}
    for t, lat in latencies:
        buckets.setdefault(int(t // bucket), []).append(lat)
    out = []
    for b in sorted(buckets):
        vals = sorted(buckets[b])
        out.append((b * bucket, nearest_rank(vals, 50), nearest_rank(vals, 99), len(vals)))
    return out


def window_p50(latencies, lo: float, hi: float):
    vals = sorted(lat for t, lat in latencies if lo <= t < hi)
    return nearest_rank(vals, 50) if vals else None


def avg_checkpoint_time(raw, protocol: str):
    if protocol == "COOR":
        durs = [r["duration"] for r in raw.rounds]
    else:
        durs = [d - s for _, idx, _, s, d in raw.checkpoints]
    return sum(durs) / len(durs) if durs else None


def recovery_times(raw, steady_window: float = 5.0, factor: float = 2.0, bucket: float = 1.0) -> list:
    """Detection to the end of the first full post-restart bucket whose p50 is
    back within ``factor`` of the pre-failure steady p50 (None if never)."""
    series = latency_series(raw.latencies, bucket)
    out = []
    for rec in raw.recoveries:
        fail, detect, done = rec["failure_time"], rec["detect_time"], rec["restart_done"]
        base = window_p50(raw.latencies, max(0.0, fail - steady_window), fail)
        found = None
        if base is not None:
            for start, p50, _, _ in series:
                if start >= done and p50 <= factor * base:
                    found = start + bucket - detect
                    break
        out.append(found)
    return out


@dataclass
class MetricsReport:
    query: str
    protocol: str
    parallelism: int
    rate: float
    hot_ratio: float
    seed: int
    horizon: float
    interval: float
    latency: list = field(default_factory=list)  # [second, p50, p99, n]
    p50: float | None = None
    p99: float | None = None
    avg_checkpoint_time: float | None = None
    restart_time: float | None = None
    recovery_time: float | None = None
    restart_times: list = field(default_factory=list)
    recovery_times: list = field(default_factory=list)
    total_checkpoints: int = 0
    invalid_checkpoints: int = 0
    abandoned_checkpoints: int = 0
    useless_checkpoints: int | None = None
    forced_checkpoints: int = 0
    skipped_rounds: int = 0
    completed_rounds: int = 0
    blocked_time: float = 0.0
    replayed_messages: int = 0
    data_bytes: int = 0
    piggyback_bytes: int = 0
    marker_bytes: int = 0
    control_bytes: int = 0
    replay_bytes: int = 0
    total_bytes: int = 0
    message_overhead_ratio: float | None = None
    mst: float | None = None
    mst_normalized: float | None = None
    consumed: int = 0
    sink_results: int = 0
    trace_hash: str | None = None
    recoveries: list = field(default_factory=list)

    @property
    def invalid_pct(self) -> float:
        return 100.0 * self.invalid_checkpoints / self.total_checkpoints if self.total_checkpoints else 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["invalid_pct"] = self.invalid_pct
        return d


def build_report(raw, *, query, protocol, parallelism, rate, hot_ratio, seed, horizon, interval,
                 warmup: float = 0.5, trace_hash=None, sink_results=0) -> MetricsReport:
    series = latency_series(raw.latencies)
    steady = sorted(lat for t, lat in raw.latencies if warmup * horizon <= t <= horizon)
    restarts = [r["restart_time"] for r in raw.recoveries]
    recs = recovery_times(raw)
    return MetricsReport(
        query=query, protocol=protocol, parallelism=parallelism, rate=rate, hot_ratio=hot_ratio,
        seed=seed, horizon=horizon, interval=interval,
        latency=[list(x) for x in series],
        p50=nearest_rank(steady, 50) if steady else None,
        p99=nearest_rank(steady, 99) if steady else None,
        avg_checkpoint_time=avg_checkpoint_time(raw, protocol),
        restart_time=sum(restarts) / len(restarts) if restarts else None,
        recovery_time=(sum(r for r in recs if r is not None) / len([r for r in recs if r is not None])
                       if any(r is not None for r in recs) else None),
        restart_times=restarts,
        recovery_times=recs,
        total_checkpoints=len(raw.checkpoints),
        invalid_checkpoints=raw.invalid_checkpoints,
        abandoned_checkpoints=raw.abandoned_checkpoints,
        useless_checkpoints=raw.useless_checkpoints,
        forced_checkpoints=raw.forced_checkpoints,
        skipped_rounds=raw.skipped_rounds,
        completed_rounds=len(raw.rounds),
        blocked_time=raw.blocked_time,
        replayed_messages=raw.replayed_messages,
        data_bytes=raw.data_bytes,
        piggyback_bytes=raw.piggyback_bytes,
        marker_bytes=raw.marker_bytes,
        control_bytes=raw.control_bytes,
        replay_bytes=raw.replay_bytes,
        total_bytes=raw.total_bytes,
        consumed=len(raw.consumed),
        sink_results=sink_results,
        trace_hash=trace_hash,
        recoveries=raw.recoveries,
    )
