"""Seven-stage pipeline model with baseline, stalled-hash, mask and cached-hash cores."""

from keyflip.sim.config import ArchKind, MicroArchConfig
from keyflip.sim.hash_cache import HashCache
from keyflip.sim.pipeline import Pipeline, Stage
from keyflip.sim.runner import RunResult, format_trace, run, write_trace
from keyflip.sim.state import MachineState, Memory, RegisterFile
from keyflip.sim.stats import CycleStats, TraceEntry

__all__ = [
    "ArchKind",
    "CycleStats",
    "HashCache",
    "MachineState",
    "Memory",
    "MicroArchConfig",
    "Pipeline",
    "RegisterFile",
    "RunResult",
    "Stage",
    "TraceEntry",
    "format_trace",
    "run",
    "write_trace",
]
