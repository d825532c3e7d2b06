"""
ProgramImage: laid-out code words at fixed addresses plus one data segment.
"""

from collections.abc import Iterator
from dataclasses import dataclass, field, replace

from keyflip.core.exceptions import FormatError, UnsupportedInstruction
from keyflip.isa.codec import decode
from keyflip.isa.instructions import MASK32, Branch, Instruction


@dataclass(frozen=True)
class ProgramImage:
    """Immutable program image; word i lives at base_addr + 4*i."""

    base_addr: int
    code: tuple[int, ...]
    entry: int
    data_base: int = 0
    data: bytes = b""
    _decoded: dict[int, Instruction] = field(
        default_factory=dict, init=False, repr=False, compare=False, hash=False
    )

    def __post_init__(self) -> None:
        object.__setattr__(self, "code", tuple(word & MASK32 for word in self.code))
        object.__setattr__(self, "data", bytes(self.data))
        if not 0 <= self.base_addr <= MASK32 or self.base_addr % 4:
            raise FormatError(f"base address 0x{self.base_addr:x} is not 4-byte aligned")
        if self.entry % 4:
            raise FormatError(f"entry 0x{self.entry:x} is not 4-byte aligned")
        if not self.code:
            raise FormatError("image has no code")
        if not self.contains(self.entry):
            raise FormatError(f"entry 0x{self.entry:08x} lies outside the code segment")
        if self.code_end > 1 << 32 or self.data_base + len(self.data) > 1 << 32:
            raise FormatError("segment exceeds the 32-bit address space")
        if self.data and self.data_base < self.code_end and self.base_addr < self.data_end:
            raise FormatError("data segment overlaps the code segment")

    @property
    def code_end(self) -> int:
        return self.base_addr + 4 * len(self.code)

    @property
    def data_end(self) -> int:
        return self.data_base + len(self.data)

    def __len__(self) -> int:
        return len(self.code)

    def contains(self, addr: int) -> bool:
        return self.base_addr <= addr < self.code_end and addr % 4 == 0

    def addr_of(self, index: int) -> int:
        return self.base_addr + 4 * index

    def index_of(self, addr: int) -> int:
        if not self.contains(addr):
            raise IndexError(f"0x{addr:08x} is not a code address")
        return (addr - self.base_addr) // 4

    def word_at(self, addr: int) -> int:
        return self.code[self.index_of(addr)]

    def instruction_at(self, addr: int) -> Instruction:
        """Decoded instruction at addr.

        Raises:
            UnsupportedInstruction: carrying addr
        """
        cached = self._decoded.get(addr)
        if cached is not None:
            return cached
        word = self.word_at(addr)
        try:
            instr = decode(word)
        except UnsupportedInstruction as exc:
            raise exc.at(addr) from None
        self._decoded[addr] = instr
        return instr

    def instructions(self) -> Iterator[tuple[int, Instruction]]:
        """Yield (addr, instruction) for every word, in address order."""
        for index in range(len(self.code)):
            addr = self.addr_of(index)
            yield addr, self.instruction_at(addr)

    def branch_addresses(self) -> list[int]:
        """Addresses of all conditional branches."""
        return [addr for addr, instr in self.instructions() if isinstance(instr, Branch)]

    def with_code(self, code: tuple[int, ...] | list[int]) -> "ProgramImage":
        """Same layout and data, different code words (word count must match)."""
        if len(code) != len(self.code):
            raise ValueError("replacement code must keep the word count")
        return replace(self, code=tuple(code))
