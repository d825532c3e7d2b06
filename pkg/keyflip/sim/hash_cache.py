"""
Direct-mapped hash-bit cache, one branch per line.
"""

from dataclasses import dataclass, field


@dataclass(slots=True)
class HashCache:
    lines: int = 256
    _valid: list[bool] = field(init=False, repr=False)
    _tags: list[int] = field(init=False, repr=False)
    _bits: list[int] = field(init=False, repr=False)
    _shift: int = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.lines < 1 or self.lines & (self.lines - 1):
            raise ValueError("cache lines must be a positive power of two")
        self._valid = [False] * self.lines
        self._tags = [0] * self.lines
        self._bits = [0] * self.lines
        self._shift = 2 + self.lines.bit_length() - 1

    def index(self, addr: int) -> int:
        return (addr >> 2) % self.lines

    def tag(self, addr: int) -> int:
        return addr >> self._shift

    def lookup(self, addr: int) -> int | None:
        """Stored bit on a hit, None on a miss. Never modifies the cache."""
        i = (addr >> 2) % self.lines
        if self._valid[i] and self._tags[i] == addr >> self._shift:
            return self._bits[i]
        return None

    def fill(self, addr: int, bit: int) -> None:
        """Install bit for addr, evicting whatever held the line."""
        i = (addr >> 2) % self.lines
        self._valid[i] = True
        self._tags[i] = addr >> self._shift
        self._bits[i] = bit & 1

    def occupancy(self) -> int:
        return sum(self._valid)
