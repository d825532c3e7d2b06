"""
Architectural state: registers, segmented memory and the halt/output record.
"""

from dataclasses import dataclass, field

from keyflip.core.exceptions import MemFault
from keyflip.isa.image import ProgramImage
from keyflip.isa.instructions import MASK32
from keyflip.isa.registers import Register

STACK_TOP = 0x8000_0000
STACK_SIZE = 0x1_0000


class RegisterFile:
    """32 x 32-bit integer registers with x0 hard-wired to zero."""

    __slots__ = ("_values",)

    def __init__(self) -> None:
        self._values = [0] * 32

    def __getitem__(self, reg: int) -> int:
        return self._values[reg]

    def __setitem__(self, reg: int, value: int) -> None:
        if reg:
            self._values[reg] = value & MASK32

    def snapshot(self) -> tuple[int, ...]:
        return tuple(self._values)

    def __repr__(self) -> str:
        named = ", ".join(
            f"{Register(i).abi}=0x{v:08x}" for i, v in enumerate(self._values) if v
        )
        return f"RegisterFile({named})"


@dataclass(slots=True)
class Segment:
    name: str
    base: int
    data: bytearray
    writable: bool

    @property
    def end(self) -> int:
        return self.base + len(self.data)


class Memory:
    """
    Byte-addressed little-endian memory over a fixed set of segments:
    the code (read-only), the image data segment and a stack below STACK_TOP.
    Anything else faults, as do misaligned halfword/word accesses.
    """

    def __init__(self, segments: list[Segment]):
        self.segments = segments

    @classmethod
    def from_image(cls, image: ProgramImage) -> "Memory":
        code = bytearray()
        for word in image.code:
            code += word.to_bytes(4, "little")
        segments = []
        if image.data:
            segments.append(Segment("data", image.data_base, bytearray(image.data), True))
        segments.append(Segment("stack", STACK_TOP - STACK_SIZE, bytearray(STACK_SIZE), True))
        segments.append(Segment("code", image.base_addr, code, False))
        return cls(segments)

    def _segment(self, addr: int, size: int, write: bool) -> tuple[Segment, int]:
        if addr % size:
            raise MemFault(addr, f"misaligned {size}-byte access")
        for seg in self.segments:
            if seg.base <= addr and addr + size <= seg.end:
                if write and not seg.writable:
                    raise MemFault(addr, f"store to read-only {seg.name} segment")
                return seg, addr - seg.base
        raise MemFault(addr, "store to unmapped address" if write else "load from unmapped address")

    def load(self, addr: int, size: int, signed: bool = False) -> int:
        """
        Raises:
            MemFault: unmapped or misaligned access
        """
        seg, off = self._segment(addr & MASK32, size, write=False)
        value = int.from_bytes(seg.data[off : off + size], "little", signed=signed)
        return value & MASK32

    def store(self, addr: int, size: int, value: int) -> None:
        """
        Raises:
            MemFault: unmapped, misaligned or read-only access
        """
        seg, off = self._segment(addr & MASK32, size, write=True)
        seg.data[off : off + size] = (value & ((1 << (8 * size)) - 1)).to_bytes(size, "little")

    def segment(self, name: str) -> Segment | None:
        return next((seg for seg in self.segments if seg.name == name), None)


@dataclass
class MachineState:
    pc: int
    regs: RegisterFile
    mem: Memory
    halted: bool = False
    exit_code: int | None = None
    output: bytearray = field(default_factory=bytearray)

    @classmethod
    def from_image(cls, image: ProgramImage) -> "MachineState":
        regs = RegisterFile()
        regs[Register.X2] = STACK_TOP
        return cls(pc=image.entry, regs=regs, mem=Memory.from_image(image))

    def data_bytes(self) -> bytes:
        seg = self.mem.segment("data")
        return bytes(seg.data) if seg is not None else b""
