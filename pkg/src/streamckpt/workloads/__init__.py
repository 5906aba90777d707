"""Query analogs and their seeded input generators."""

from .generators import GeneratorConfig, SourceRecord, dump_source_log, load_source_log
from .queries import QUERY_IDS, Query, QuerySpec, UnknownQuery, build_query, generate

__all__ = [
    "GeneratorConfig", "SourceRecord", "dump_source_log", "load_source_log",
    "QUERY_IDS", "Query", "QuerySpec", "UnknownQuery", "build_query", "generate",
]
