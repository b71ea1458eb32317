"""Benchmarking framework for evolutionary multitask optimization."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .core import (
    ConfigurationError,
    DimensionError,
    Individual,
    Optimum,
    Population,
    ProblemInstance,
    RunResult,
    RunState,
    TaskSpec,
    compare_feasible,
    decode_unified,
    encode_unified,
    evaluate,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND", "ConfigurationError", "DimensionError", "Individual", "Optimum", "Population",
    "ProblemInstance", "RunResult", "RunState", "TaskSpec", "compare_feasible", "decode_unified",
    "encode_unified", "evaluate",
]
