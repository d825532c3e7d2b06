"""
Cycle counters and retired-instruction trace records.
"""

from dataclasses import asdict, dataclass


@dataclass(slots=True)
class CycleStats:
    cycles: int = 0
    retired: int = 0
    branch_count: int = 0
    taken_flushes: int = 0
    hash_stall_cycles: int = 0
    load_use_stalls: int = 0
    cache_hits: int = 0
    cache_misses: int = 0

    def as_dict(self) -> dict[str, int]:
        return asdict(self)

    def to_kv(self, extra: dict[str, object] | None = None) -> str:
        """Flat `key=value` block, one counter per line."""
        items: dict[str, object] = dict(extra or {})
        items.update(self.as_dict())
        return "".join(f"{name}={value}\n" for name, value in items.items())

    @property
    def cache_hit_rate(self) -> float | None:
        lookups = self.cache_hits + self.cache_misses
        return self.cache_hits / lookups if lookups else None


@dataclass(frozen=True, slots=True)
class TraceEntry:
    """One retired instruction; taken/d are set for conditional branches only."""

    cycle: int
    pc: int
    word: int
    taken: bool | None = None
    d: int | None = None

    @property
    def key(self) -> tuple[int, bool | None]:
        """What must agree between a reference run and a deobfuscated run."""
        return (self.pc, self.taken)

    def format(self) -> str:
        line = f"{self.cycle} {self.pc:08x} {self.word:08x}"
        if self.taken is not None:
            line += f" B {'taken' if self.taken else 'not-taken'} d={self.d}"
        return line
