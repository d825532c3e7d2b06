"""
RV32I instruction data model and the branch-condition complement map.

Instructions are immutable value objects; immediates are stored sign-extended
(I/S/B/J formats) or as the raw unsigned 20-bit field (U format).
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Union

from keyflip.core.exceptions import NotABranch
from keyflip.isa.registers import Register

MASK32 = 0xFFFFFFFF


class BranchCond(Enum):
    """Conditional-branch comparison kinds, valued by their funct3."""

    EQ = 0b000
    NE = 0b001
    LT = 0b100
    GE = 0b101
    LTU = 0b110
    GEU = 0b111

    @property
    def mnemonic(self) -> str:
        return "b" + self.name.lower()

    def complement(self) -> "BranchCond":
        return _COMPLEMENT[self]

    def evaluate(self, v1: int, v2: int) -> bool:
        """Taken bit for operand values (any int, interpreted as 32-bit)."""
        if self is BranchCond.EQ:
            return (v1 & MASK32) == (v2 & MASK32)
        if self is BranchCond.NE:
            return (v1 & MASK32) != (v2 & MASK32)
        if self is BranchCond.LT:
            return to_signed(v1) < to_signed(v2)
        if self is BranchCond.GE:
            return to_signed(v1) >= to_signed(v2)
        if self is BranchCond.LTU:
            return (v1 & MASK32) < (v2 & MASK32)
        return (v1 & MASK32) >= (v2 & MASK32)


# The funct3 encodings differ exactly in bit 0 for each complementary pair.
_COMPLEMENT = {cond: BranchCond(cond.value ^ 1) for cond in BranchCond}


class AluOp(Enum):
    """ALU operations shared by the OP and OP-IMM groups, valued by funct3."""

    ADD = 0b000
    SUB = 0b1000  # OP only (funct7 0x20)
    SLL = 0b001
    SLT = 0b010
    SLTU = 0b011
    XOR = 0b100
    SRL = 0b101
    SRA = 0b1101  # funct7 0x20 variant of SRL
    OR = 0b110
    AND = 0b111

    @property
    def funct3(self) -> int:
        return self.value & 0b111

    @property
    def alt(self) -> bool:
        """True for the funct7=0x20 variants (SUB, SRA)."""
        return bool(self.value & 0b1000)

    @property
    def is_shift(self) -> bool:
        return self in (AluOp.SLL, AluOp.SRL, AluOp.SRA)


class LoadWidth(Enum):
    B = 0b000
    H = 0b001
    W = 0b010
    BU = 0b100
    HU = 0b101

    @property
    def size(self) -> int:
        return {LoadWidth.B: 1, LoadWidth.BU: 1, LoadWidth.H: 2, LoadWidth.HU: 2}.get(self, 4)

    @property
    def signed(self) -> bool:
        return self in (LoadWidth.B, LoadWidth.H)


class StoreWidth(Enum):
    B = 0b000
    H = 0b001
    W = 0b010

    @property
    def size(self) -> int:
        return 1 << self.value


def to_signed(value: int) -> int:
    value &= MASK32
    return value - (1 << 32) if value & 0x80000000 else value


@dataclass(frozen=True, slots=True)
class AluImm:
    op: AluOp
    rd: Register
    rs1: Register
    imm: int

    @property
    def mnemonic(self) -> str:
        return {AluOp.SLTU: "sltiu"}.get(self.op, self.op.name.lower() + "i")


@dataclass(frozen=True, slots=True)
class AluReg:
    op: AluOp
    rd: Register
    rs1: Register
    rs2: Register

    @property
    def mnemonic(self) -> str:
        return self.op.name.lower()


@dataclass(frozen=True, slots=True)
class Lui:
    rd: Register
    imm20: int

    mnemonic = "lui"


@dataclass(frozen=True, slots=True)
class Auipc:
    rd: Register
    imm20: int

    mnemonic = "auipc"


@dataclass(frozen=True, slots=True)
class Load:
    width: LoadWidth
    rd: Register
    base: Register
    offset: int

    @property
    def mnemonic(self) -> str:
        return "l" + self.width.name.lower()


@dataclass(frozen=True, slots=True)
class Store:
    width: StoreWidth
    src: Register
    base: Register
    offset: int

    @property
    def mnemonic(self) -> str:
        return "s" + self.width.name.lower()


@dataclass(frozen=True, slots=True)
class Branch:
    cond: BranchCond
    rs1: Register
    rs2: Register
    offset: int

    @property
    def mnemonic(self) -> str:
        return self.cond.mnemonic

    def static_taken(self, v1: int, v2: int) -> bool:
        """Outcome from the encoded condition alone, before any hardware XOR."""
        return self.cond.evaluate(v1, v2)


@dataclass(frozen=True, slots=True)
class Jal:
    rd: Register
    offset: int

    mnemonic = "jal"


@dataclass(frozen=True, slots=True)
class Jalr:
    rd: Register
    rs1: Register
    offset: int

    mnemonic = "jalr"


@dataclass(frozen=True, slots=True)
class Ecall:
    mnemonic = "ecall"


Instruction = Union[AluImm, AluReg, Lui, Auipc, Load, Store, Branch, Jal, Jalr, Ecall]


def complement_branch(instr: Instruction) -> Branch:
    """Reverse a conditional branch: same registers and offset, negated taken bit.

    Raises:
        NotABranch: if instr is not a conditional branch
    """
    if not isinstance(instr, Branch):
        raise NotABranch(f"cannot complement {instr.mnemonic}")
    return replace(instr, cond=instr.cond.complement())


def destination(instr: Instruction) -> Register | None:
    """Register written by instr, or None (x0 writes count as none)."""
    rd = getattr(instr, "rd", None)
    if rd is None or rd == Register.X0:
        return None
    return rd


def sources(instr: Instruction) -> tuple[Register, ...]:
    """Registers read by instr."""
    if isinstance(instr, (AluReg, Branch)):
        return (instr.rs1, instr.rs2)
    if isinstance(instr, (AluImm, Jalr)):
        return (instr.rs1,)
    if isinstance(instr, Load):
        return (instr.base,)
    if isinstance(instr, Store):
        return (instr.base, instr.src)
    if isinstance(instr, Ecall):
        return (Register.X10, Register.X17)
    return ()
