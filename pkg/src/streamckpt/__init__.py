"""Deterministic simulator for checkpointing protocols in streaming dataflows."""

from .dataflow import DataflowGraph, OperatorInstanceId, build_graph
from .kernels import BACKEND
from .protocols import CyclicTopologyUnsupported
from .sim import ConfigInvalid, CostModel, FailureSpec, InvariantViolation, SimConfig, run

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "DataflowGraph", "OperatorInstanceId", "build_graph", "CyclicTopologyUnsupported",
    "ConfigInvalid", "CostModel", "FailureSpec", "InvariantViolation", "SimConfig", "run",
]
