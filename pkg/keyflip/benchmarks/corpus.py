"""
Registry of the bundled benchmarks.

Every program is self-contained: no input, output through the write-byte
ECALL, exit code 0. All of them keep loaded values at least three
instructions away from a branch that reads them, and none lets a
conditional branch fall through into another, so the hash stall of every
dynamic branch shows up in full in the cycle count.
"""

from functools import lru_cache
from importlib.resources import files

from pydantic import BaseModel, ConfigDict, Field

from keyflip.asm.assembler import SourceUnit, assemble
from keyflip.isa.image import ProgramImage

BRANCH_DENSE = "branch-dense"
LOOP_REUSE = "loop-reuse"
MIXED = "mixed"
CONFLICT = "conflict"
BRANCHLESS = "branchless"


class BenchSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    source: str = Field(description="file name under keyflip/benchmarks/programs")
    description: str = ""
    expected_exit: int = 0
    expected_output: bytes = b""
    tags: frozenset[str] = frozenset()

    def source_text(self) -> str:
        return _program_text(self.source)

    def image(self) -> ProgramImage:
        """Assembled image (cached per benchmark)."""
        return _assemble(self.name, self.source)

    def has_tag(self, tag: str) -> bool:
        return tag in self.tags


def _program_text(source: str) -> str:
    return files("keyflip.benchmarks").joinpath("programs", source).read_text("utf-8")


@lru_cache(maxsize=None)
def _assemble(name: str, source: str) -> ProgramImage:
    return assemble(SourceUnit(_program_text(source), name=source))


CORPUS: tuple[BenchSpec, ...] = (
    BenchSpec(
        name="fib",
        source="fib.s",
        description="iterative Fibonacci, n = 1..20, each value recomputed",
        expected_output=bytes.fromhex("0101020305080d1522375990e97962db3d18556d"),
        tags=frozenset({LOOP_REUSE}),
    ),
    BenchSpec(
        name="bubble-sort",
        source="bubble_sort.s",
        description="bubble sort of 16 bytes with early exit",
        expected_output=bytes.fromhex("0001030508090f1f2a3f4d4d6480c8ff"),
        tags=frozenset({LOOP_REUSE, MIXED}),
    ),
    BenchSpec(
        name="sieve",
        source="sieve.s",
        description="sieve of Eratosthenes below 64",
        expected_output=bytes.fromhex("020305070b0d1113171d1f25292b2f353b3d"),
        tags=frozenset({LOOP_REUSE, MIXED}),
    ),
    BenchSpec(
        name="matmul-int",
        source="matmul_int.s",
        description="unrolled 3x3 integer matrix product, no branches",
        expected_output=bytes.fromhex("090c0f48576644586c"),
        tags=frozenset({BRANCHLESS}),
    ),
    BenchSpec(
        name="branch-dense",
        source="branch_dense.s",
        description="64 xorshift32 rounds with three data-dependent branches each",
        expected_output=bytes.fromhex("6e000000dc"),
        tags=frozenset({BRANCH_DENSE, LOOP_REUSE}),
    ),
    BenchSpec(
        name="state-machine",
        source="state_machine.s",
        description="direct-threaded 32-state text scanner, 288 static branches",
        expected_output=bytes.fromhex("20040a"),
        tags=frozenset({CONFLICT, MIXED}),
    ),
)


def load_corpus(tag: str | None = None) -> list[BenchSpec]:
    """All bundled benchmarks, optionally restricted to one tag."""
    return [spec for spec in CORPUS if tag is None or spec.has_tag(tag)]


def get_benchmark(name: str) -> BenchSpec:
    """
    Raises:
        KeyError: no benchmark of that name
    """
    for spec in CORPUS:
        if spec.name == name:
            return spec
    raise KeyError(name)
