"""Event-trace format and hashing.

One event per line, ``time<TAB>tiebreak<TAB>kind<TAB>details``; details are
space-separated ``key=value`` tokens. The trace hash is 64-bit FNV-1a over the
canonical bytes of all event lines (header and comment lines excluded).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import kernels

TRACE_HEADER = "streamckpt-trace v1"
CONFIG_PREFIX = "#config\t"


class TraceFormatError(ValueError):
    pass


def format_line(time: float, tiebreak: int, kind: str, details: str) -> str:
    return f"{time!r}\t{tiebreak}\t{kind}\t{details}\n"


def trace_hash(lines) -> int:
    return kernels.fnv1a64("".join(lines).encode())


def hash_hex(h: int) -> str:
    return f"{h:016x}"


def write_trace(path, lines, config: dict | None = None):
    with open(path, "w") as fh:
        fh.write(TRACE_HEADER + "\n")
        if config is not None:
            fh.write(CONFIG_PREFIX + json.dumps(config, sort_keys=True) + "\n")
        fh.writelines(lines)


@dataclass
class TraceEvent:
    time: float
    tiebreak: int
    kind: str
    fields: dict = field(default_factory=dict)


def parse_details(details: str) -> dict:
    out = {}
    for tok in details.split():
        k, sep, v = tok.partition("=")
        if not sep:
            raise TraceFormatError(f"bad detail token {tok!r}")
        out[k] = v
    return out


def read_trace(path):
    """Returns (config or None, raw event lines, parsed events)."""
    with open(path) as fh:
        header = fh.readline().rstrip("\n")
        if header != TRACE_HEADER:
            raise TraceFormatError(f"expected header {TRACE_HEADER!r}, got {header!r}")
        config = None
        lines, events = [], []
        prev = None
        for raw in fh:
            if raw.startswith(CONFIG_PREFIX):
                config = json.loads(raw[len(CONFIG_PREFIX):])
                continue
            if raw.startswith("#") or not raw.strip():
                continue
            parts = raw.rstrip("\n").split("\t")
            if len(parts) != 4:
                raise TraceFormatError(f"expected 4 tab-separated fields: {raw!r}")
            t, tb = float(parts[0]), int(parts[1])
            if prev is not None and t < prev:
                raise TraceFormatError(f"time goes backwards at {raw!r}")
            prev = t
            lines.append(raw if raw.endswith("\n") else raw + "\n")
            events.append(TraceEvent(t, tb, parts[2], parse_details(parts[3])))
    return config, lines, events
