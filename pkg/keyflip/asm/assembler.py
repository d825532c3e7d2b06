"""
Two-pass RV32I assembler.

Pass one expands pseudo-instructions to a fixed size and assigns every label an
address; pass two resolves operands and encodes. Layout is therefore final
before any word is produced, which is what the obfuscator relies on.
"""

import re
from dataclasses import dataclass, field
from pathlib import Path

import structlog

from keyflip.core.exceptions import (
    DuplicateLabel,
    KeyflipError,
    ParseError,
    RangeError,
    UndefinedLabel,
)
from keyflip.isa.codec import encode
from keyflip.isa.image import ProgramImage
from keyflip.isa.instructions import (
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
    Load,
    LoadWidth,
    Lui,
    Store,
    StoreWidth,
)
from keyflip.isa.registers import Register, parse_register

logger = structlog.get_logger(__name__)

DEFAULT_BASE = 0x1000
MAX_ALIGN = 12
NOP_WORD = 0x00000013
DATA_ALIGN = 0x1000

LABEL_RE = re.compile(r"^\s*([A-Za-z_.$][A-Za-z0-9_.$]*)\s*:")
SYMBOL_RE = re.compile(r"^[A-Za-z_.$][A-Za-z0-9_.$]*$")
MEM_OPERAND_RE = re.compile(r"^(.*)\(\s*([A-Za-z0-9]+)\s*\)$")

TEXT, DATA = "text", "data"

ALU_REG_OPS = {op.name.lower(): op for op in AluOp}
ALU_IMM_OPS = {
    "addi": AluOp.ADD,
    "slti": AluOp.SLT,
    "sltiu": AluOp.SLTU,
    "xori": AluOp.XOR,
    "ori": AluOp.OR,
    "andi": AluOp.AND,
    "slli": AluOp.SLL,
    "srli": AluOp.SRL,
    "srai": AluOp.SRA,
}
BRANCHES = {cond.mnemonic: cond for cond in BranchCond}
SWAPPED_BRANCHES = {
    "bgt": BranchCond.LT,
    "ble": BranchCond.GE,
    "bgtu": BranchCond.LTU,
    "bleu": BranchCond.GEU,
}
ZERO_BRANCHES = {
    "beqz": (BranchCond.EQ, False),
    "bnez": (BranchCond.NE, False),
    "bltz": (BranchCond.LT, False),
    "bgez": (BranchCond.GE, False),
    "blez": (BranchCond.GE, True),
    "bgtz": (BranchCond.LT, True),
}
LOADS = {"l" + width.name.lower(): width for width in LoadWidth}
STORES = {"s" + width.name.lower(): width for width in StoreWidth}


@dataclass
class SourceUnit:
    """Assembly source text plus an optional name for diagnostics."""

    text: str
    name: str = "<source>"

    def lines(self) -> list[str]:
        return self.text.splitlines()


@dataclass
class _Statement:
    line: int
    mnemonic: str
    operands: list[str]
    addr: int = 0
    size: int = 1


@dataclass
class _Layout:
    base: int | None = None
    entry: str | None = None
    entry_line: int = 0
    data_base: int | None = None
    code: list[_Statement] = field(default_factory=list)
    data: bytearray = field(default_factory=bytearray)
    data_refs: list[tuple[int, int, str]] = field(default_factory=list)
    labels: dict[str, tuple[str, int]] = field(default_factory=dict)
    code_words: int = 0


def _strip_comment(text: str) -> str:
    quote = None
    for i, ch in enumerate(text):
        escaped = i > 0 and text[i - 1] == "\\"
        if quote is not None:
            if ch == quote and not escaped:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "#":
            return text[:i]
    return text


def _split_operands(text: str) -> list[str]:
    text = text.strip()
    if not text:
        return []
    return [part.strip() for part in text.split(",")]


def parse_int(token: str, line: int) -> int:
    """Parse a decimal, hex, binary or character literal."""
    token = token.strip()
    if len(token) == 3 and token[0] == token[2] == "'":
        return ord(token[1])
    try:
        return int(token, 0)
    except ValueError:
        raise ParseError(line, f"expected an integer, got '{token}'") from None


def _is_int(token: str) -> bool:
    token = token.strip()
    if len(token) == 3 and token[0] == token[2] == "'":
        return True
    try:
        int(token, 0)
    except ValueError:
        return False
    return True


def split_hi_lo(value: int) -> tuple[int, int]:
    """Split a 32-bit value into (upper 20 bits, sign-extended low 12) for LUI/AUIPC pairs."""
    value &= 0xFFFFFFFF
    lo = value & 0xFFF
    if lo >= 0x800:
        lo -= 0x1000
    hi = ((value - lo) >> 12) & 0xFFFFF
    return hi, lo


def _li_size(value: int) -> int:
    if -2048 <= value <= 2047:
        return 1
    _, lo = split_hi_lo(value)
    return 1 if lo == 0 else 2


def _parse_ascii(token: str, line: int) -> bytes:
    token = token.strip()
    if len(token) < 2 or token[0] != '"' or token[-1] != '"':
        raise ParseError(line, "expected a quoted string")
    try:
        return token[1:-1].encode("latin-1").decode("unicode_escape").encode("latin-1")
    except (UnicodeError, ValueError):
        raise ParseError(line, "invalid string escape") from None


class Assembler:
    """Assembles one SourceUnit into a ProgramImage."""

    def __init__(self, source: SourceUnit):
        self.source = source
        self.layout = _Layout()
        self.section = TEXT

    # Pass one

    def _define(self, name: str, line: int) -> None:
        if name in self.layout.labels:
            raise DuplicateLabel(name, line)
        if self.section == TEXT:
            self.layout.labels[name] = (TEXT, self.layout.code_words)
        else:
            self.layout.labels[name] = (DATA, len(self.layout.data))

    @staticmethod
    def _alignment(args: str, line: int) -> int:
        """Byte alignment for `.align N` (power of two, N in 0..MAX_ALIGN)."""
        shift = parse_int(args, line)
        if not 0 <= shift <= MAX_ALIGN:
            raise ParseError(line, f".align takes 0..{MAX_ALIGN}, got {shift}")
        return 1 << shift

    def _directive(self, name: str, args: str, line: int) -> None:
        operands = _split_operands(args)
        layout = self.layout

        if name == ".org":
            if self.section != TEXT or layout.code_words:
                raise ParseError(line, ".org must precede all code")
            base = parse_int(args, line)
            if base % 4:
                raise ParseError(line, f".org address 0x{base:x} is not 4-byte aligned")
            layout.base = base
        elif name == ".entry":
            if len(operands) != 1:
                raise ParseError(line, ".entry takes one label")
            layout.entry, layout.entry_line = operands[0], line
        elif name == ".text":
            self.section = TEXT
        elif name == ".data":
            self.section = DATA
            if operands:
                if layout.data_base is not None and layout.data:
                    raise ParseError(line, "data base already fixed")
                layout.data_base = parse_int(operands[0], line)
        elif name == ".word":
            if not operands:
                raise ParseError(line, ".word needs a value")
            for operand in operands:
                if self.section == TEXT:
                    layout.code.append(_Statement(line, ".word", [operand]))
                    layout.code_words += 1
                else:
                    if _is_int(operand):
                        layout.data += (parse_int(operand, line) & 0xFFFFFFFF).to_bytes(4, "little")
                    else:
                        layout.data_refs.append((len(layout.data), line, operand))
                        layout.data += bytes(4)
        elif name == ".align" and self.section == TEXT:
            base = DEFAULT_BASE if layout.base is None else layout.base
            addr = base + 4 * layout.code_words
            for _ in range(-addr % self._alignment(args, line) // 4):
                layout.code.append(_Statement(line, ".word", [f"0x{NOP_WORD:08x}"]))
                layout.code_words += 1
        elif name in (".byte", ".ascii", ".asciz", ".space", ".align"):
            if self.section != DATA:
                raise ParseError(line, f"{name} is only allowed in the data section")
            if name == ".byte":
                layout.data += bytes(parse_int(op, line) & 0xFF for op in operands)
            elif name in (".ascii", ".asciz"):
                layout.data += _parse_ascii(args, line)
                if name == ".asciz":
                    layout.data.append(0)
            elif name == ".space":
                count = parse_int(args, line)
                if count < 0:
                    raise ParseError(line, f".space count must not be negative, got {count}")
                layout.data += bytes(count)
            else:
                layout.data += bytes(-len(layout.data) % self._alignment(args, line))
        else:
            raise ParseError(line, f"unknown directive {name}")

    def _statement_size(self, mnemonic: str, operands: list[str], line: int) -> int:
        if mnemonic == "li":
            if len(operands) != 2:
                raise ParseError(line, "li takes rd, imm")
            value = parse_int(operands[1], line)
            if not -(1 << 31) <= value <= 0xFFFFFFFF:
                raise RangeError(f"li value {value} does not fit in 32 bits", line)
            return _li_size(value)
        if mnemonic in ("call", "la"):
            return 2
        return 1

    def first_pass(self) -> None:
        for line_no, raw in enumerate(self.source.lines(), start=1):
            text = _strip_comment(raw)
            while True:
                match = LABEL_RE.match(text)
                if not match:
                    break
                self._define(match.group(1), line_no)
                text = text[match.end() :]
            text = text.strip()
            if not text:
                continue

            head, *tail = text.split(None, 1)
            rest = tail[0] if tail else ""
            mnemonic = head.lower()

            if mnemonic.startswith("."):
                self._directive(mnemonic, rest.strip(), line_no)
                continue
            if self.section != TEXT:
                raise ParseError(line_no, "instructions are only allowed in the text section")

            operands = _split_operands(rest)
            size = self._statement_size(mnemonic, operands, line_no)
            self.layout.code.append(_Statement(line_no, mnemonic, operands, size=size))
            self.layout.code_words += size

    # Pass two

    def _addresses(self) -> tuple[int, int]:
        base = DEFAULT_BASE if self.layout.base is None else self.layout.base
        code_end = base + 4 * self.layout.code_words
        data_base = self.layout.data_base
        if data_base is None:
            data_base = (code_end + DATA_ALIGN - 1) // DATA_ALIGN * DATA_ALIGN
        return base, data_base

    def _symbol(self, name: str, line: int) -> int:
        try:
            section, offset = self.layout.labels[name]
        except KeyError:
            raise UndefinedLabel(name, line) from None
        base, data_base = self._addresses()
        return base + 4 * offset if section == TEXT else data_base + offset

    def _reg(self, token: str, line: int) -> Register:
        try:
            return parse_register(token)
        except KeyError:
            raise ParseError(line, f"unknown register '{token}'") from None

    def _target(self, token: str, pc: int, line: int) -> int:
        """pc-relative byte offset to a label, or a literal relative offset."""
        if _is_int(token):
            return parse_int(token, line)
        if not SYMBOL_RE.match(token):
            raise ParseError(line, f"bad branch target '{token}'")
        return self._symbol(token, line) - pc

    def _mem(self, token: str, line: int) -> tuple[int, Register]:
        match = MEM_OPERAND_RE.match(token.strip())
        if not match:
            raise ParseError(line, f"expected offset(base), got '{token}'")
        offset_text = match.group(1).strip()
        offset = parse_int(offset_text, line) if offset_text else 0
        return offset, self._reg(match.group(2), line)

    def _arity(self, stmt: _Statement, count: int) -> list[str]:
        if len(stmt.operands) != count:
            raise ParseError(
                stmt.line, f"{stmt.mnemonic} expects {count} operands, got {len(stmt.operands)}"
            )
        return stmt.operands

    def _expand(self, stmt: _Statement) -> list[Instruction]:
        m, line, pc = stmt.mnemonic, stmt.line, stmt.addr
        reg = lambda token: self._reg(token, line)  # noqa: E731
        imm = lambda token: parse_int(token, line)  # noqa: E731

        if m in ALU_REG_OPS:
            rd, rs1, rs2 = self._arity(stmt, 3)
            return [AluReg(ALU_REG_OPS[m], reg(rd), reg(rs1), reg(rs2))]
        if m in ALU_IMM_OPS:
            rd, rs1, value = self._arity(stmt, 3)
            return [AluImm(ALU_IMM_OPS[m], reg(rd), reg(rs1), imm(value))]
        if m in LOADS:
            rd, mem = self._arity(stmt, 2)
            offset, base = self._mem(mem, line)
            return [Load(LOADS[m], reg(rd), base, offset)]
        if m in STORES:
            src, mem = self._arity(stmt, 2)
            offset, base = self._mem(mem, line)
            return [Store(STORES[m], reg(src), base, offset)]
        if m in BRANCHES:
            rs1, rs2, target = self._arity(stmt, 3)
            return [Branch(BRANCHES[m], reg(rs1), reg(rs2), self._target(target, pc, line))]
        if m in SWAPPED_BRANCHES:
            rs1, rs2, target = self._arity(stmt, 3)
            cond = SWAPPED_BRANCHES[m]
            return [Branch(cond, reg(rs2), reg(rs1), self._target(target, pc, line))]
        if m in ZERO_BRANCHES:
            rs, target = self._arity(stmt, 2)
            cond, swap = ZERO_BRANCHES[m]
            a, b = (Register.X0, reg(rs)) if swap else (reg(rs), Register.X0)
            return [Branch(cond, a, b, self._target(target, pc, line))]
        if m in ("lui", "auipc"):
            rd, value = self._arity(stmt, 2)
            upper = imm(value)
            if not -(1 << 19) <= upper <= 0xFFFFF:
                raise RangeError(f"upper immediate {upper} out of range", line)
            cls = Lui if m == "lui" else Auipc
            return [cls(reg(rd), upper & 0xFFFFF)]
        if m == "jal":
            if len(stmt.operands) == 1:
                return [Jal(Register.X1, self._target(stmt.operands[0], pc, line))]
            rd, target = self._arity(stmt, 2)
            return [Jal(reg(rd), self._target(target, pc, line))]
        if m == "jalr":
            if len(stmt.operands) == 1:
                return [Jalr(Register.X1, reg(stmt.operands[0]), 0)]
            if len(stmt.operands) == 2:
                offset, base = self._mem(stmt.operands[1], line)
                return [Jalr(reg(stmt.operands[0]), base, offset)]
            rd, rs1, value = self._arity(stmt, 3)
            return [Jalr(reg(rd), reg(rs1), imm(value))]
        if m == "ecall":
            self._arity(stmt, 0)
            return [Ecall()]

        # Pseudo-instructions
        if m == "nop":
            self._arity(stmt, 0)
            return [AluImm(AluOp.ADD, Register.X0, Register.X0, 0)]
        if m == "li":
            rd, value = self._arity(stmt, 2)
            number = imm(value)
            if -2048 <= number <= 2047:
                return [AluImm(AluOp.ADD, reg(rd), Register.X0, number)]
            hi, lo = split_hi_lo(number)
            out: list[Instruction] = [Lui(reg(rd), hi)]
            if lo:
                out.append(AluImm(AluOp.ADD, reg(rd), reg(rd), lo))
            return out
        if m == "mv":
            rd, rs = self._arity(stmt, 2)
            return [AluImm(AluOp.ADD, reg(rd), reg(rs), 0)]
        if m == "not":
            rd, rs = self._arity(stmt, 2)
            return [AluImm(AluOp.XOR, reg(rd), reg(rs), -1)]
        if m == "neg":
            rd, rs = self._arity(stmt, 2)
            return [AluReg(AluOp.SUB, reg(rd), Register.X0, reg(rs))]
        if m == "seqz":
            rd, rs = self._arity(stmt, 2)
            return [AluImm(AluOp.SLTU, reg(rd), reg(rs), 1)]
        if m == "snez":
            rd, rs = self._arity(stmt, 2)
            return [AluReg(AluOp.SLTU, reg(rd), Register.X0, reg(rs))]
        if m == "j":
            (target,) = self._arity(stmt, 1)
            return [Jal(Register.X0, self._target(target, pc, line))]
        if m == "jr":
            (rs,) = self._arity(stmt, 1)
            return [Jalr(Register.X0, reg(rs), 0)]
        if m == "ret":
            self._arity(stmt, 0)
            return [Jalr(Register.X0, Register.X1, 0)]
        if m == "call":
            (target,) = self._arity(stmt, 1)
            hi, lo = split_hi_lo(self._target(target, pc, line))
            return [Auipc(Register.X1, hi), Jalr(Register.X1, Register.X1, lo)]
        if m == "la":
            rd, target = self._arity(stmt, 2)
            hi, lo = split_hi_lo(self._target(target, pc, line))
            return [Auipc(reg(rd), hi), AluImm(AluOp.ADD, reg(rd), reg(rd), lo)]

        raise ParseError(line, f"unknown mnemonic '{m}'")

    def second_pass(self) -> ProgramImage:
        layout = self.layout
        base, data_base = self._addresses()
        words: list[int] = []

        for stmt in layout.code:
            stmt.addr = base + 4 * len(words)
            if stmt.mnemonic == ".word":
                token = stmt.operands[0]
                if _is_int(token):
                    value = parse_int(token, stmt.line)
                else:
                    value = self._symbol(token, stmt.line)
                words.append(value & 0xFFFFFFFF)
                continue
            expanded = self._expand(stmt)
            if len(expanded) != stmt.size:
                raise ParseError(stmt.line, f"internal size mismatch for {stmt.mnemonic}")
            for instr in expanded:
                try:
                    words.append(encode(instr))
                except RangeError as exc:
                    raise RangeError(exc.message, stmt.line) from None

        data = bytearray(layout.data)
        for offset, line, name in layout.data_refs:
            data[offset : offset + 4] = self._symbol(name, line).to_bytes(4, "little")

        if not words:
            raise ParseError(0, "source contains no instructions")

        if layout.entry is None:
            entry = base
        elif _is_int(layout.entry):
            entry = parse_int(layout.entry, layout.entry_line)
        else:
            entry = self._symbol(layout.entry, layout.entry_line)

        return ProgramImage(
            base_addr=base, code=tuple(words), entry=entry, data_base=data_base, data=bytes(data)
        )


def assemble(source: SourceUnit | str) -> ProgramImage:
    """Assemble source text into a ProgramImage.

    Raises:
        ParseError, UndefinedLabel, DuplicateLabel, RangeError
    """
    if isinstance(source, str):
        source = SourceUnit(source)
    assembler = Assembler(source)
    try:
        assembler.first_pass()
        image = assembler.second_pass()
    except KeyflipError as exc:
        logger.debug("assembly_failed", source=source.name, error=exc.message)
        raise
    logger.debug("assembled", source=source.name, words=len(image.code), data_bytes=len(image.data))
    return image


def assemble_file(path: str | Path) -> ProgramImage:
    """Assemble a `.s` file."""
    path = Path(path)
    return assemble(SourceUnit(path.read_text(encoding="utf-8"), name=str(path)))
