"""
Differential checking of obfuscated images against their originals.

The reference is always the original image on the baseline core. A
deobfuscating core must reproduce its retired-pc sequence, branch outcomes,
final registers, data segment, output bytes and exit code exactly.
"""

from dataclasses import dataclass
from pathlib import Path

import structlog

from keyflip.core.config import settings
from keyflip.core.exceptions import KeyflipError, VerificationFailed
from keyflip.isa.image import ProgramImage
from keyflip.obfuscate.mask import MaskStream, make_mask
from keyflip.obfuscate.verify import find_pairing_mismatch
from keyflip.prf.keys import ProgramKey
from keyflip.sim.config import MicroArchConfig
from keyflip.sim.pipeline import Pipeline
from keyflip.sim.runner import RunResult, run, write_trace
from keyflip.sim.stats import TraceEntry

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class Divergence:
    arch: str
    reason: str
    index: int | None = None
    pc: int | None = None

    def describe(self) -> str:
        where = ""
        if self.index is not None:
            where += f" at trace index {self.index}"
        if self.pc is not None:
            where += f" (pc 0x{self.pc:08x})"
        return f"{self.arch}: {self.reason}{where}"


def first_divergence(reference: list[TraceEntry], candidate: list[TraceEntry]) -> int | None:
    """
    Index of the first retired instruction where two traces disagree on pc or
    branch outcome. A trace that stops early diverges at its length.

    Returns:
        None if the traces are identical
    """
    for i, (ref, cand) in enumerate(zip(reference, candidate)):
        if ref.key != cand.key:
            return i
    if len(reference) != len(candidate):
        return min(len(reference), len(candidate))
    return None


def compare_runs(reference: RunResult, candidate: RunResult, arch: str) -> Divergence | None:
    """First observable difference between two completed runs, or None."""
    index = first_divergence(reference.trace, candidate.trace)
    if index is not None:
        pc = reference.trace[index].pc if index < len(reference.trace) else None
        return Divergence(arch, "retired trace differs", index, pc)
    if reference.state.regs.snapshot() != candidate.state.regs.snapshot():
        return Divergence(arch, "final registers differ")
    if reference.state.data_bytes() != candidate.state.data_bytes():
        return Divergence(arch, "final data segment differs")
    if reference.state.output != candidate.state.output:
        return Divergence(arch, "output bytes differ")
    if reference.state.exit_code != candidate.state.exit_code:
        return Divergence(arch, "exit code differs")
    return None


def partial_trace(
    image: ProgramImage, arch: MicroArchConfig, max_cycles: int
) -> tuple[list[TraceEntry], KeyflipError | None]:
    """
    Trace retired before the run halts, faults or hits max_cycles.
    Used for the untrusted-core view, where an obfuscated image may never halt.
    """
    pipeline = Pipeline(image, arch)
    try:
        pipeline.run(max_cycles)
    except KeyflipError as exc:
        pipeline.drain()
        return pipeline.trace, exc
    return pipeline.trace, None


class VerificationService:
    """Static pairing plus differential runs on every trusted core."""

    def __init__(
        self,
        key: ProgramKey,
        hash_latency: int | None = None,
        cache_lines: int | None = None,
        max_cycles: int | None = None,
        trace_dir: Path | None = None,
    ):
        """
        Initialize verification service.

        Args:
            key: Program key the image was obfuscated with
            hash_latency: Hash unit latency for the stalled and cached cores
            cache_lines: Hash cache size for the cached core
            max_cycles: Cycle budget per run
            trace_dir: Where to dump both traces when a run diverges
        """
        self.key = key
        self.hash_latency = hash_latency or settings.HASH_LATENCY
        self.cache_lines = cache_lines or settings.CACHE_LINES
        self.max_cycles = max_cycles or settings.MAX_CYCLES
        self.trace_dir = trace_dir

    def trusted_archs(self, mask: MaskStream) -> list[MicroArchConfig]:
        return [
            MicroArchConfig.stalled(self.key, self.hash_latency),
            MicroArchConfig.cached(self.key, self.hash_latency, self.cache_lines),
            MicroArchConfig.masked(mask),
        ]

    def differential(
        self,
        original: ProgramImage,
        obfuscated: ProgramImage,
        archs: list[MicroArchConfig],
        reference: RunResult | None = None,
    ) -> Divergence | None:
        """
        Run the original on baseline and the obfuscated image on each arch.

        Returns:
            The first divergence found, or None when every arch agrees
        """
        if reference is None:
            reference = run(original, MicroArchConfig.baseline(), self.max_cycles)
        for arch in archs:
            try:
                candidate = run(obfuscated, arch, self.max_cycles)
            except KeyflipError as exc:
                return Divergence(arch.label, f"run failed: {exc.message}")
            divergence = compare_runs(reference, candidate, arch.label)
            if divergence is not None:
                self._dump_traces(reference, candidate, arch.label)
                return divergence
        return None

    def verify(
        self,
        original: ProgramImage,
        obfuscated: ProgramImage,
        mask: MaskStream | None = None,
    ) -> None:
        """
        Check that obfuscated pairs with original under the key.

        Args:
            original: Image before obfuscation
            obfuscated: Image claimed to be its keyed rewrite
            mask: Sidecar for the mask core; derived from the key when omitted

        Raises:
            ShapeMismatch: images differ in layout
            VerificationFailed: static mismatch or diverging run
        """
        mismatch = find_pairing_mismatch(original, obfuscated, self.key)
        if mismatch is not None:
            logger.warning(
                "verification_failed",
                stage="static",
                addr=f"0x{mismatch.addr:08x}",
                reason=mismatch.reason,
                key_fingerprint=self.key.fingerprint(),
            )
            raise VerificationFailed(
                f"static pairing fails at 0x{mismatch.addr:08x}: {mismatch.reason} "
                f"(expected 0x{mismatch.expected:08x}, found 0x{mismatch.actual:08x})",
                addr=mismatch.addr,
            )

        if mask is None:
            mask = make_mask(original, self.key)
        divergence = self.differential(original, obfuscated, self.trusted_archs(mask))
        if divergence is not None:
            logger.warning(
                "verification_failed",
                stage="differential",
                detail=divergence.describe(),
                key_fingerprint=self.key.fingerprint(),
            )
            raise VerificationFailed(
                f"differential run diverges: {divergence.describe()}",
                addr=divergence.pc,
                index=divergence.index,
            )

        logger.info("verification_passed", key_fingerprint=self.key.fingerprint())

    def _dump_traces(self, reference: RunResult, candidate: RunResult, label: str) -> None:
        if self.trace_dir is None:
            return
        self.trace_dir.mkdir(parents=True, exist_ok=True)
        write_trace(reference.trace, self.trace_dir / "reference.trace")
        write_trace(candidate.trace, self.trace_dir / f"{label}.trace")
        logger.info("traces_written", directory=str(self.trace_dir), arch=label)
