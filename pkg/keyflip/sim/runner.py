"""
Run a program image to completion on one core variant.
"""

from pathlib import Path
from typing import NamedTuple

import structlog

from keyflip.core.config import settings
from keyflip.isa.image import ProgramImage
from keyflip.sim.config import ArchKind, MicroArchConfig
from keyflip.sim.pipeline import Pipeline
from keyflip.sim.state import MachineState
from keyflip.sim.stats import CycleStats, TraceEntry

logger = structlog.get_logger(__name__)


class RunResult(NamedTuple):
    state: MachineState
    stats: CycleStats
    trace: list[TraceEntry]

    def retired_pcs(self) -> list[int]:
        return [entry.pc for entry in self.trace]


def run(
    image: ProgramImage, arch: MicroArchConfig, max_cycles: int | None = None
) -> RunResult:
    """
    Simulate image on arch until the exit ECALL retires.

    Raises:
        MissingKey / MissingMask: arch lacks its deobfuscation input
        MaskError: mask does not fit the image
        MemFault, UnsupportedInstruction, UnsupportedSyscall: at the faulting pc
        CycleLimitExceeded: no halt within max_cycles
    """
    arch.require_inputs()
    if arch.kind is ArchKind.MASK:
        arch.mask.validate_for(image)
    limit = max_cycles if max_cycles is not None else settings.MAX_CYCLES

    pipeline = Pipeline(image, arch)
    try:
        pipeline.run(limit)
    except Exception:
        logger.warning(
            "simulation_aborted",
            arch=arch.label,
            cycle=pipeline.cycle,
            retired=pipeline.stats.retired,
        )
        raise

    stats = pipeline.stats
    logger.debug(
        "simulation_finished",
        arch=arch.label,
        cycles=stats.cycles,
        retired=stats.retired,
        exit_code=pipeline.state.exit_code,
    )
    return RunResult(pipeline.state, stats, pipeline.trace)


def format_trace(trace: list[TraceEntry]) -> str:
    return "".join(entry.format() + "\n" for entry in trace)


def write_trace(trace: list[TraceEntry], path: str | Path) -> None:
    Path(path).write_text(format_trace(trace), encoding="utf-8")
