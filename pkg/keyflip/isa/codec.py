"""
Bit-exact RV32I encoder/decoder for the supported subset.

decode rejects every word the encoder could not have produced, so
encode(decode(w)) == w holds for all accepted words.
"""

from functools import lru_cache

from keyflip.core.exceptions import RangeError, UnsupportedInstruction
from keyflip.isa.instructions import (
    MASK32,
    AluImm,
    AluOp,
    AluReg,
    Auipc,
    Branch,
    BranchCond,
    Ecall,
    Instruction,
    Jal,
    Jalr,
    Lui,
    Load,
    LoadWidth,
    Store,
    StoreWidth,
)
from keyflip.isa.registers import Register

OPCODE_LUI = 0x37
OPCODE_AUIPC = 0x17
OPCODE_JAL = 0x6F
OPCODE_JALR = 0x67
OPCODE_BRANCH = 0x63
OPCODE_LOAD = 0x03
OPCODE_STORE = 0x23
OPCODE_OP_IMM = 0x13
OPCODE_OP = 0x33
OPCODE_SYSTEM = 0x73

ECALL_WORD = 0x00000073

IMM12_MIN, IMM12_MAX = -2048, 2047
BRANCH_MIN, BRANCH_MAX = -4096, 4094
JAL_MIN, JAL_MAX = -(1 << 20), (1 << 20) - 2

_ALU_BY_FUNCT3 = {op.funct3: op for op in AluOp if not op.alt}
_BRANCH_BY_FUNCT3 = {cond.value: cond for cond in BranchCond}
_LOAD_BY_FUNCT3 = {width.value: width for width in LoadWidth}
_STORE_BY_FUNCT3 = {width.value: width for width in StoreWidth}


def _sext(value: int, bits: int) -> int:
    sign = 1 << (bits - 1)
    return (value & (sign - 1)) - (value & sign)


def _check_range(name: str, value: int, low: int, high: int) -> None:
    if not low <= value <= high:
        raise RangeError(f"{name} {value} outside [{low}, {high}]")


# Field extraction


def _rd(word: int) -> Register:
    return Register((word >> 7) & 0x1F)


def _rs1(word: int) -> Register:
    return Register((word >> 15) & 0x1F)


def _rs2(word: int) -> Register:
    return Register((word >> 20) & 0x1F)


def _imm_i(word: int) -> int:
    return _sext(word >> 20, 12)


def _imm_s(word: int) -> int:
    return _sext(((word >> 25) << 5) | ((word >> 7) & 0x1F), 12)


def _imm_b(word: int) -> int:
    imm = (
        ((word >> 31) & 0x1) << 12
        | ((word >> 7) & 0x1) << 11
        | ((word >> 25) & 0x3F) << 5
        | ((word >> 8) & 0xF) << 1
    )
    return _sext(imm, 13)


def _imm_j(word: int) -> int:
    imm = (
        ((word >> 31) & 0x1) << 20
        | ((word >> 12) & 0xFF) << 12
        | ((word >> 20) & 0x1) << 11
        | ((word >> 21) & 0x3FF) << 1
    )
    return _sext(imm, 21)


@lru_cache(maxsize=65536)
def decode(word: int) -> Instruction:
    """Decode a 32-bit little-endian-loaded instruction word.

    Raises:
        UnsupportedInstruction: word outside the subset or malformed
    """
    word &= MASK32
    opcode = word & 0x7F
    funct3 = (word >> 12) & 0x7
    funct7 = word >> 25

    if opcode == OPCODE_OP_IMM:
        op = _ALU_BY_FUNCT3[funct3]
        if op.is_shift:
            shamt = (word >> 20) & 0x1F
            if funct7 == 0x20 and op is AluOp.SRL:
                op = AluOp.SRA
            elif funct7 != 0:
                raise UnsupportedInstruction(word)
            return AluImm(op, _rd(word), _rs1(word), shamt)
        return AluImm(op, _rd(word), _rs1(word), _imm_i(word))

    if opcode == OPCODE_OP:
        op = _ALU_BY_FUNCT3[funct3]
        if funct7 == 0x20 and op in (AluOp.ADD, AluOp.SRL):
            op = AluOp.SUB if op is AluOp.ADD else AluOp.SRA
        elif funct7 != 0:
            raise UnsupportedInstruction(word)
        return AluReg(op, _rd(word), _rs1(word), _rs2(word))

    if opcode == OPCODE_LUI:
        return Lui(_rd(word), word >> 12)

    if opcode == OPCODE_AUIPC:
        return Auipc(_rd(word), word >> 12)

    if opcode == OPCODE_LOAD and funct3 in _LOAD_BY_FUNCT3:
        return Load(_LOAD_BY_FUNCT3[funct3], _rd(word), _rs1(word), _imm_i(word))

    if opcode == OPCODE_STORE and funct3 in _STORE_BY_FUNCT3:
        return Store(_STORE_BY_FUNCT3[funct3], _rs2(word), _rs1(word), _imm_s(word))

    if opcode == OPCODE_BRANCH and funct3 in _BRANCH_BY_FUNCT3:
        return Branch(_BRANCH_BY_FUNCT3[funct3], _rs1(word), _rs2(word), _imm_b(word))

    if opcode == OPCODE_JAL:
        return Jal(_rd(word), _imm_j(word))

    if opcode == OPCODE_JALR and funct3 == 0:
        return Jalr(_rd(word), _rs1(word), _imm_i(word))

    if word == ECALL_WORD:
        return Ecall()

    raise UnsupportedInstruction(word)


# Format packers


def _pack_r(opcode: int, rd: int, funct3: int, rs1: int, rs2: int, funct7: int) -> int:
    return (funct7 << 25) | (rs2 << 20) | (rs1 << 15) | (funct3 << 12) | (rd << 7) | opcode


def _pack_i(opcode: int, rd: int, funct3: int, rs1: int, imm: int) -> int:
    return ((imm & 0xFFF) << 20) | (rs1 << 15) | (funct3 << 12) | (rd << 7) | opcode


def _pack_s(opcode: int, funct3: int, rs1: int, rs2: int, imm: int) -> int:
    imm &= 0xFFF
    return (
        ((imm >> 5) << 25)
        | (rs2 << 20)
        | (rs1 << 15)
        | (funct3 << 12)
        | ((imm & 0x1F) << 7)
        | opcode
    )


def _pack_b(funct3: int, rs1: int, rs2: int, offset: int) -> int:
    imm = offset & 0x1FFF
    return (
        ((imm >> 12) & 0x1) << 31
        | ((imm >> 5) & 0x3F) << 25
        | (rs2 << 20)
        | (rs1 << 15)
        | (funct3 << 12)
        | ((imm >> 1) & 0xF) << 8
        | ((imm >> 11) & 0x1) << 7
        | OPCODE_BRANCH
    )


def _pack_j(rd: int, offset: int) -> int:
    imm = offset & 0x1FFFFF
    return (
        ((imm >> 20) & 0x1) << 31
        | ((imm >> 1) & 0x3FF) << 21
        | ((imm >> 11) & 0x1) << 20
        | ((imm >> 12) & 0xFF) << 12
        | (rd << 7)
        | OPCODE_JAL
    )


def encode(instr: Instruction) -> int:
    """Encode an instruction to its 32-bit word.

    Raises:
        RangeError: immediate or offset not encodable
    """
    if isinstance(instr, AluImm):
        if instr.op.is_shift:
            _check_range("shift amount", instr.imm, 0, 31)
            funct7 = 0x20 if instr.op is AluOp.SRA else 0
            return _pack_r(OPCODE_OP_IMM, instr.rd, instr.op.funct3, instr.rs1, instr.imm, funct7)
        if instr.op is AluOp.SUB:
            raise RangeError("SUB has no immediate form")
        _check_range("immediate", instr.imm, IMM12_MIN, IMM12_MAX)
        return _pack_i(OPCODE_OP_IMM, instr.rd, instr.op.funct3, instr.rs1, instr.imm)

    if isinstance(instr, AluReg):
        funct7 = 0x20 if instr.op.alt else 0
        return _pack_r(OPCODE_OP, instr.rd, instr.op.funct3, instr.rs1, instr.rs2, funct7)

    if isinstance(instr, (Lui, Auipc)):
        _check_range("upper immediate", instr.imm20, 0, 0xFFFFF)
        opcode = OPCODE_LUI if isinstance(instr, Lui) else OPCODE_AUIPC
        return (instr.imm20 << 12) | (instr.rd << 7) | opcode

    if isinstance(instr, Load):
        _check_range("load offset", instr.offset, IMM12_MIN, IMM12_MAX)
        return _pack_i(OPCODE_LOAD, instr.rd, instr.width.value, instr.base, instr.offset)

    if isinstance(instr, Store):
        _check_range("store offset", instr.offset, IMM12_MIN, IMM12_MAX)
        return _pack_s(OPCODE_STORE, instr.width.value, instr.base, instr.src, instr.offset)

    if isinstance(instr, Branch):
        _check_range("branch offset", instr.offset, BRANCH_MIN, BRANCH_MAX)
        if instr.offset & 1:
            raise RangeError(f"branch offset {instr.offset} is odd")
        return _pack_b(instr.cond.value, instr.rs1, instr.rs2, instr.offset)

    if isinstance(instr, Jal):
        _check_range("jump offset", instr.offset, JAL_MIN, JAL_MAX)
        if instr.offset & 1:
            raise RangeError(f"jump offset {instr.offset} is odd")
        return _pack_j(instr.rd, instr.offset)

    if isinstance(instr, Jalr):
        _check_range("jalr offset", instr.offset, IMM12_MIN, IMM12_MAX)
        return _pack_i(OPCODE_JALR, instr.rd, 0, instr.rs1, instr.offset)

    if isinstance(instr, Ecall):
        return ECALL_WORD

    raise TypeError(f"not an instruction: {instr!r}")


def try_decode(word: int) -> Instruction | None:
    """decode, returning None instead of raising."""
    try:
        return decode(word)
    except UnsupportedInstruction:
        return None
