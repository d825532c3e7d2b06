"""
Benchmark harness: every corpus program on the baseline core and on each
trusted core, reported as CSV and Markdown.
"""

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from decimal import ROUND_HALF_EVEN, Decimal

import structlog
from pydantic import BaseModel, ConfigDict

from keyflip.benchmarks.corpus import BenchSpec
from keyflip.core.config import settings
from keyflip.core.exceptions import KeyflipError
from keyflip.obfuscate.mask import MaskStream, make_mask
from keyflip.obfuscate.obfuscator import obfuscate_image
from keyflip.prf.keys import ProgramKey
from keyflip.sim.config import MicroArchConfig
from keyflip.sim.runner import RunResult, run

logger = structlog.get_logger(__name__)

CSV_COLUMNS = [
    "benchmark",
    "arch",
    "cycles",
    "retired",
    "branches",
    "overhead_pct",
    "hash_stalls",
    "cache_hits",
    "cache_misses",
]
MARKDOWN_COLUMNS = [
    "benchmark",
    "arch",
    "cycles",
    "retired",
    "branches",
    "overhead %",
    "hash stalls",
    "hit rate %",
]
FAILED = "failed"
_CENT = Decimal("0.01")


def overhead_pct(cycles: int, baseline_cycles: int) -> Decimal:
    """100 * (cycles - baseline) / baseline, rounded half-even to 2 places."""
    ratio = Decimal(100 * (cycles - baseline_cycles)) / Decimal(baseline_cycles)
    return ratio.quantize(_CENT, rounding=ROUND_HALF_EVEN)


class ReportRow(BaseModel):
    """One (benchmark, arch) measurement; counters are None when the run failed."""

    model_config = ConfigDict(frozen=True)

    benchmark: str
    arch: str
    cycles: int | None = None
    retired: int | None = None
    branches: int | None = None
    overhead_pct: Decimal | None = None
    hash_stalls: int | None = None
    cache_hits: int | None = None
    cache_misses: int | None = None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    @property
    def cache_hit_rate(self) -> Decimal | None:
        if self.cache_hits is None or self.cache_misses is None:
            return None
        lookups = self.cache_hits + self.cache_misses
        if not lookups:
            return None
        return (Decimal(100 * self.cache_hits) / Decimal(lookups)).quantize(
            _CENT, rounding=ROUND_HALF_EVEN
        )

    def csv_fields(self) -> list[str]:
        if self.failed:
            return [self.benchmark, self.arch, "", "", "", FAILED, "", "", ""]
        cached = self.arch.startswith("cached")
        return [
            self.benchmark,
            self.arch,
            str(self.cycles),
            str(self.retired),
            str(self.branches),
            "" if self.overhead_pct is None else f"{self.overhead_pct:.2f}",
            str(self.hash_stalls),
            str(self.cache_hits) if cached else "",
            str(self.cache_misses) if cached else "",
        ]


def arch_order(latencies: list[int]) -> list[str]:
    """Canonical column order: baseline, stalled-*, cached-*, mask."""
    return (
        ["baseline"]
        + [f"stalled-{lat}" for lat in latencies]
        + [f"cached-{lat}" for lat in latencies]
        + ["mask"]
    )


class BenchService:
    """Runs the corpus against the baseline and the trusted cores."""

    def __init__(
        self,
        key: ProgramKey | None = None,
        latencies: list[int] | None = None,
        cache_lines: int | None = None,
        max_cycles: int | None = None,
        workers: int | None = None,
    ):
        """
        Initialize benchmark service.

        Args:
            key: Obfuscation key; defaults to the documented benchmark key
            latencies: Hash latencies for the stalled and cached cores
            cache_lines: Hash cache size for the cached cores
            max_cycles: Cycle budget per run
            workers: Benchmarks run in a process pool when greater than one
        """
        self.key = key or ProgramKey.from_hex(settings.BENCH_KEY)
        self.latencies = latencies or settings.bench_latencies
        self.cache_lines = cache_lines or settings.CACHE_LINES
        self.max_cycles = max_cycles or settings.MAX_CYCLES
        self.workers = workers or settings.BENCH_WORKERS

    def arch_labels(self) -> list[str]:
        return arch_order(self.latencies)

    def _trusted_archs(self, mask: MaskStream) -> list[MicroArchConfig]:
        archs = [MicroArchConfig.stalled(self.key, lat) for lat in self.latencies]
        archs += [
            MicroArchConfig.cached(self.key, lat, self.cache_lines) for lat in self.latencies
        ]
        archs.append(MicroArchConfig.masked(mask))
        return archs

    def _row(
        self, spec: BenchSpec, label: str, result: RunResult, baseline: int | None
    ) -> ReportRow:
        stats = result.stats
        return ReportRow(
            benchmark=spec.name,
            arch=label,
            cycles=stats.cycles,
            retired=stats.retired,
            branches=stats.branch_count,
            overhead_pct=None if baseline is None else overhead_pct(stats.cycles, baseline),
            hash_stalls=stats.hash_stall_cycles,
            cache_hits=stats.cache_hits,
            cache_misses=stats.cache_misses,
        )

    def _failed(self, spec: BenchSpec, label: str, exc: KeyflipError) -> ReportRow:
        logger.warning("bench_row_failed", arch=label, error=exc.message)
        return ReportRow(benchmark=spec.name, arch=label, error=exc.message)

    def run_benchmark(self, spec: BenchSpec) -> list[ReportRow]:
        """
        Obfuscate one benchmark and measure it on every arch.

        Args:
            spec: Benchmark to run

        Returns:
            Rows in canonical arch order; failed runs are marked, not raised
        """
        with structlog.contextvars.bound_contextvars(benchmark=spec.name):
            return self._measure(spec)

    def _measure(self, spec: BenchSpec) -> list[ReportRow]:
        original = spec.image()
        obfuscated, report = obfuscate_image(original, self.key)
        mask = make_mask(original, self.key)

        rows: list[ReportRow] = []
        try:
            reference = run(original, MicroArchConfig.baseline(), self.max_cycles)
            baseline_cycles = reference.stats.cycles
            rows.append(self._row(spec, "baseline", reference, baseline_cycles))
        except KeyflipError as exc:
            baseline_cycles = None
            rows.append(self._failed(spec, "baseline", exc))

        for arch in self._trusted_archs(mask):
            try:
                result = run(obfuscated, arch, self.max_cycles)
            except KeyflipError as exc:
                rows.append(self._failed(spec, arch.label, exc))
                continue
            rows.append(self._row(spec, arch.label, result, baseline_cycles))

        logger.info(
            "benchmark_measured",
            flipped=report.flipped,
            total_branches=report.total_branches,
            key_fingerprint=report.key_fingerprint,
        )
        return rows

    def run(self, specs: list[BenchSpec]) -> list[ReportRow]:
        """
        Measure every benchmark. Output order is (benchmark, canonical arch)
        regardless of worker count.
        """
        if self.workers > 1 and len(specs) > 1:
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                batches = list(pool.map(self.run_benchmark, specs))
        else:
            batches = [self.run_benchmark(spec) for spec in specs]

        order = {label: i for i, label in enumerate(self.arch_labels())}
        rows = [row for batch in batches for row in batch]
        return sorted(rows, key=lambda row: (row.benchmark, order.get(row.arch, len(order))))


def to_csv(rows: list[ReportRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.csv_fields())
    return buffer.getvalue()


def to_markdown(rows: list[ReportRow]) -> str:
    """Markdown table with the cache hit rate in place of raw hit/miss counts."""
    lines = [
        "| " + " | ".join(MARKDOWN_COLUMNS) + " |",
        "|" + "---|" * len(MARKDOWN_COLUMNS),
    ]
    for row in rows:
        if row.failed:
            lines.append(f"| {row.benchmark} | {row.arch} | FAILED: {row.error} | | | | | |")
            continue
        overhead = "" if row.overhead_pct is None else f"{row.overhead_pct:.2f}"
        hit_rate = row.cache_hit_rate if row.arch.startswith("cached") else None
        lines.append(
            f"| {row.benchmark} | {row.arch} | {row.cycles} | {row.retired} | {row.branches} "
            f"| {overhead} | {row.hash_stalls} | {'' if hit_rate is None else hit_rate} |"
        )
    return "\n".join(lines) + "\n"
