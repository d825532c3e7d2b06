"""
Disassembler producing source that reassembles to the identical image.
"""

from keyflip.asm.assembler import SourceUnit
from keyflip.isa.image import ProgramImage
from keyflip.isa.instructions import (
    AluImm,
    AluReg,
    Auipc,
    Branch,
    Ecall,
    Instruction,
    Jal,
    Jalr,
    Load,
    Lui,
    Store,
)

BYTES_PER_DATA_LINE = 16


def label_for(addr: int) -> str:
    return f"L_{addr:08x}"


def _target_text(image: ProgramImage, pc: int, offset: int) -> str:
    target = (pc + offset) & 0xFFFFFFFF
    return label_for(target) if image.contains(target) else str(offset)


def format_instruction(instr: Instruction, pc: int, image: ProgramImage | None = None) -> str:
    """Render one instruction in numeric-register syntax.

    Branch and jump targets inside image are rendered as synthesized labels.
    """

    def target(offset: int) -> str:
        if image is None:
            return str(offset)
        return _target_text(image, pc, offset)

    m = instr.mnemonic
    if isinstance(instr, AluImm):
        return f"{m} {instr.rd}, {instr.rs1}, {instr.imm}"
    if isinstance(instr, AluReg):
        return f"{m} {instr.rd}, {instr.rs1}, {instr.rs2}"
    if isinstance(instr, (Lui, Auipc)):
        return f"{m} {instr.rd}, 0x{instr.imm20:x}"
    if isinstance(instr, Load):
        return f"{m} {instr.rd}, {instr.offset}({instr.base})"
    if isinstance(instr, Store):
        return f"{m} {instr.src}, {instr.offset}({instr.base})"
    if isinstance(instr, Branch):
        return f"{m} {instr.rs1}, {instr.rs2}, {target(instr.offset)}"
    if isinstance(instr, Jal):
        return f"{m} {instr.rd}, {target(instr.offset)}"
    if isinstance(instr, Jalr):
        return f"{m} {instr.rd}, {instr.rs1}, {instr.offset}"
    if isinstance(instr, Ecall):
        return m
    raise TypeError(f"not an instruction: {instr!r}")


def _referenced_labels(image: ProgramImage) -> set[int]:
    labels = {image.entry}
    for addr, instr in image.instructions():
        if isinstance(instr, (Branch, Jal)):
            target = (addr + instr.offset) & 0xFFFFFFFF
            if image.contains(target):
                labels.add(target)
    return labels


def disassemble(image: ProgramImage) -> SourceUnit:
    """Render an image as assembly source.

    Raises:
        UnsupportedInstruction: carrying the address of the first bad word
    """
    labels = _referenced_labels(image)
    lines = [
        f"# {len(image.code)} words at 0x{image.base_addr:08x}",
        f".org 0x{image.base_addr:08x}",
        f".entry {label_for(image.entry)}",
    ]
    for addr, instr in image.instructions():
        if addr in labels:
            lines.append(f"{label_for(addr)}:")
        lines.append(f"    {format_instruction(instr, addr, image)}")

    lines.append(f".data 0x{image.data_base:08x}")
    for start in range(0, len(image.data), BYTES_PER_DATA_LINE):
        chunk = image.data[start : start + BYTES_PER_DATA_LINE]
        lines.append("    .byte " + ", ".join(f"0x{byte:02x}" for byte in chunk))

    return SourceUnit("\n".join(lines) + "\n", name="<disassembly>")
