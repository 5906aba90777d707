"""``streamckpt`` command line: run, mst, sweep, replay, oracle.

Exit codes: 0 success, 1 configuration error, 2 invariant violation.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys

from .dataflow import GraphError
from .harness.config import load_config, spec_from_dict, spec_to_dict
from .harness.experiment import NeverSustainable, measure_mst, report_json, run_experiment, run_spec, with_overhead
from .protocols.base import CyclicTopologyUnsupported
from .recovery import History, find_orphans
from .sim import ConfigInvalid, InvariantViolation
from .trace import TraceFormatError, hash_hex, read_trace, trace_hash, write_trace

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT = 0, 1, 2

BRUTE_FORCE_LIMIT = 200_000  # combinations; larger lines use the fixpoint check


class OracleFailure(InvariantViolation):
    pass


def _print_report(rep):
    keys = ("protocol", "query", "parallelism", "rate", "p50", "p99", "avg_checkpoint_time",
            "restart_time", "recovery_time", "total_checkpoints", "invalid_checkpoints",
            "forced_checkpoints", "skipped_rounds", "message_overhead_ratio", "trace_hash")
    d = rep.to_dict()
    for k in keys:
        print(f"{k:24s} {d[k]}")


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    spec = cfg.base
    if spec.workload.rate is None:
        rate = measure_mst(spec, cfg.mst)[0]
        from dataclasses import replace
        spec = replace(spec, workload=replace(spec.workload, rate=spec.workload.mst_fraction * rate))
    rep, res = run_spec(spec, trace=True)
    with_overhead(rep, spec)
    out = args.out or os.path.join(cfg.output_dir, spec.label() + ".json")
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    with open(out, "w") as fh:
        fh.write(report_json(rep, spec))
    if args.trace:
        write_trace(args.trace, res.lines, spec_to_dict(spec))
    _print_report(rep)
    return EXIT_OK


def cmd_mst(args) -> int:
    cfg = load_config(args.config)
    rate, probes = measure_mst(cfg.base, cfg.mst)
    for p in probes:
        print(f"probe rate={p.rate:.3f} sustainable={p.sustainable} throughput={p.throughput:.3f}")
    print(f"mst {rate:.3f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.out:
        cfg.output_dir = args.out
    rows = run_experiment(cfg, with_mst=args.mst)
    failed = [r["cell"] for r in rows if r["status"] != "ok"]
    print(f"{len(rows)} cells, {len(failed)} failed; reports in {cfg.output_dir}")
    for c in failed:
        print(f"failed: {c}")
    return EXIT_OK


def cmd_replay(args) -> int:
    config, lines, _ = read_trace(args.trace)
    if config is None:
        raise ConfigInvalid(f"{args.trace}: no embedded config, cannot replay")
    spec = spec_from_dict(config)
    _, res = run_spec(spec, trace=True)
    want, got = trace_hash(lines), res.trace_hash
    print(f"recorded {hash_hex(want)}")
    print(f"replayed {hash_hex(got)}")
    if want != got:
        for i, (a, b) in enumerate(itertools.zip_longest(lines, res.lines)):
            if a != b:
                print(f"first difference at event {i}:\n  recorded {a!r}\n  replayed {b!r}")
                break
        raise InvariantViolation("replay diverged from the recorded trace")
    return EXIT_OK


# -- trace oracle -------------------------------------------------------------


def max_consistent_line(history: History, upper: dict) -> dict:
    """Greatest orphan-free line below ``upper``: roll receivers of orphans back
    to the interval they received in, until nothing changes."""
    line = dict(upper)
    changed = True
    while changed:
        changed = False
        for _, _, src, dst, a, b in history.iter_messages():
            if b is not None and b < line[dst] and a >= line[src]:
                line[dst] = b
                changed = True
    return line


def brute_force_line(history: History, upper: dict) -> dict:
    owners = sorted(upper)
    msgs = [(owners.index(src), owners.index(dst), a, b)
            for _, _, src, dst, a, b in history.iter_messages() if b is not None]
    best = [0] * len(owners)
    for combo in itertools.product(*(range(upper[o] + 1) for o in owners)):
        if any(b < combo[d] and a >= combo[s] for s, d, a, b in msgs):
            continue
        best = [max(x, y) for x, y in zip(best, combo)]
    return dict(zip(owners, best))


def check_trace(events, protocol: str) -> list[str]:
    """Rebuild send/receive/checkpoint history from trace events and check every
    recorded recovery line. Returns human-readable results; raises OracleFailure."""
    channels, owners = {}, []
    for ev in events:
        if ev.kind == "Channel":
            cid = int(ev.fields["cid"])
            channels[cid] = (ev.fields["src"], ev.fields["dst"])
            for o in (ev.fields["src"], ev.fields["dst"]):
                if o not in owners:
                    owners.append(o)
    hist = History(channels)
    for o in owners:
        hist.add_owner(o)
    durable = {o: 0 for o in owners}
    results = []
    for ev in events:
        f = ev.fields
        if ev.kind == "Send":
            hist.send(int(f["cid"]), int(f["seq"]))
        elif ev.kind == "Process":
            cid, seq = int(f["cid"]), int(f["seq"])
            if hist.messages[cid][seq - 1][1] is None:
                hist.receive(cid, seq)
        elif ev.kind == "SnapshotStart":
            hist.checkpoint(f["inst"])
        elif ev.kind == "Durable":
            durable[f["inst"]] = int(f["index"])
        elif ev.kind == "Restore":
            line = {}
            for tok in f["line"].split(","):
                o, _, i = tok.rpartition(":")
                line[o] = int(i)
            orphans = find_orphans(line, hist)
            if orphans:
                raise OracleFailure(f"t={ev.time}: line {line} has orphans {orphans[:5]}")
            space = 1
            for o in owners:
                space *= durable[o] + 1
            if space <= BRUTE_FORCE_LIMIT:
                best, how = brute_force_line(hist, durable), "brute-force"
            else:
                best, how = max_consistent_line(hist, durable), "fixpoint"
            if any(line[o] > durable[o] for o in owners):
                raise OracleFailure(f"t={ev.time}: line {line} uses non-durable checkpoints")
            if protocol in ("UNC", "CIC") and line != best:
                raise OracleFailure(f"t={ev.time}: line {line} is not maximal ({how} gives {best})")
            if protocol == "COOR" and any(line[o] > best[o] for o in owners):
                raise OracleFailure(f"t={ev.time}: line {line} exceeds {how} maximum {best}")
            results.append(f"t={ev.time:.6f} line ok ({how}, {len(orphans)} orphans)")
            hist.rollback(line)
            durable = dict(line)
    return results


def cmd_oracle(args) -> int:
    config, _, events = read_trace(args.trace)
    protocol = (config or {}).get("protocol", "UNC")
    results = check_trace(events, protocol)
    for r in results:
        print(r)
    print(f"oracle: {len(results)} recovery lines checked, all consistent")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="streamckpt", description="Checkpointing protocol simulator")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run the base cell of a config")
    p.add_argument("config")
    p.add_argument("--out", help="report path (default: <output dir>/<cell>.json)")
    p.add_argument("--trace", help="also write the event trace here")
    p.set_defaults(fn=cmd_run)
    p = sub.add_parser("mst", help="measure maximum sustainable throughput")
    p.add_argument("config")
    p.set_defaults(fn=cmd_mst)
    p = sub.add_parser("sweep", help="run the full experiment matrix")
    p.add_argument("config")
    p.add_argument("--out", help="override output directory")
    p.add_argument("--mst", action="store_true", help="also measure per-cell MST (slow)")
    p.set_defaults(fn=cmd_sweep)
    p = sub.add_parser("replay", help="re-execute a trace's config and compare hashes")
    p.add_argument("trace")
    p.set_defaults(fn=cmd_replay)
    p = sub.add_parser("oracle", help="brute-force recovery-line and orphan checks on a trace")
    p.add_argument("trace")
    p.set_defaults(fn=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except CyclicTopologyUnsupported as exc:
        # the protocol cannot run on this graph at all: a configuration problem
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigInvalid, NeverSustainable, GraphError, TraceFormatError, OSError,
            json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
