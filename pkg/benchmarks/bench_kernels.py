"""Compiled core vs pure-Python fallback on the three kernels and one full run.

    python benchmarks/bench_kernels.py [--repeat N]

The end-to-end row runs the simulator in a subprocess per backend
(``STREAMCKPT_PURE=1`` selects the fallback) and checks both produce the
same trace hash.
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import timeit

from streamckpt import _pycore

try:
    from streamckpt import _core
except ImportError:
    _core = None


def reach_case(n=4000, deg=3, roots=64, seed=1):
    rng = random.Random(seed)
    indptr, indices = [0], []
    for v in range(n):
        succ = sorted({rng.randrange(n) for _ in range(deg)})
        indices.extend(succ)
        indptr.append(len(indices))
    return n, indptr, indices, rng.sample(range(n), roots)


def zpath_case(procs=8, msgs=3000, intervals=40, seed=2):
    rng = random.Random(seed)
    by_sender = [[] for _ in range(procs)]
    for _ in range(msgs):
        s = rng.randrange(procs)
        d = rng.randrange(procs - 1)
        d += d >= s
        by_sender[s].append((rng.randrange(intervals), d, rng.randrange(intervals)))
    for lst in by_sender:
        lst.sort(key=lambda t: (-t[0], t[1], t[2]))
    return procs, by_sender, 0, intervals // 2


E2E = ("from streamckpt.workloads.queries import *;"
       "from streamckpt.workloads.generators import GeneratorConfig;"
       "from streamckpt import run, SimConfig, BACKEND; import time;"
       "q = build_query(QuerySpec('Q3', 4));"
       "s = generate(q.spec, GeneratorConfig(rate=1000, seed=0), 5.0);"
       "t = time.perf_counter();"
       "r = run(q.graph, q.logic, s, SimConfig(protocol='UNC', horizon=5.0, failures=((2.5, 1),), z_check=True));"
       "print(BACKEND, time.perf_counter() - t, r.trace_hash)")


def end_to_end():
    rows = {}
    for pure in ("0", "1"):
        env = dict(os.environ, STREAMCKPT_PURE=pure)
        out = subprocess.run([sys.executable, "-c", E2E], env=env, capture_output=True, text=True, check=True)
        backend, secs, h = out.stdout.split()
        rows[backend] = (float(secs), h)
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _core is None:
        print("compiled core not built; only the fallback is available")
    data = os.urandom(1 << 20)
    reach = reach_case()
    zp = zpath_case()
    cases = [
        ("fnv1a64 1 MiB", lambda m: m.fnv1a64(data, _pycore.FNV_OFFSET)),
        ("strict_reach_marks n=4000", lambda m: m.strict_reach_marks(*reach)),
        ("zpath_lowest_intervals 3000 msgs", lambda m: m.zpath_lowest_intervals(*zp)),
    ]
    print(f"{'kernel':36s} {'pure (ms)':>10s} {'compiled (ms)':>14s} {'speedup':>8s}")
    for name, fn in cases:
        pure = min(timeit.repeat(lambda: fn(_pycore), number=1, repeat=args.repeat)) * 1e3
        if _core is None:
            print(f"{name:36s} {pure:10.2f} {'-':>14s} {'-':>8s}")
            continue
        a, b = fn(_core), fn(_pycore)
        if (a if isinstance(a, int) else list(a)) != (b if isinstance(b, int) else list(b)):
            raise SystemExit(f"{name}: backends disagree")
        comp = min(timeit.repeat(lambda: fn(_core), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:36s} {pure:10.2f} {comp:14.2f} {pure / comp:7.1f}x")
    rows = end_to_end()
    for backend, (secs, h) in sorted(rows.items()):
        print(f"end-to-end Q3 UNC run [{backend:8s}] {secs:8.2f} s  trace {int(h):016x}")
    if len({h for _, h in rows.values()}) != 1:
        print("backends disagree on the trace hash")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
