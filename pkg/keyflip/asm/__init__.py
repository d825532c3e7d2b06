"""Assembler, disassembler and `.rvimg` image files."""

from keyflip.asm.assembler import SourceUnit, assemble, assemble_file
from keyflip.asm.disassembler import disassemble, format_instruction
from keyflip.asm.image_file import load_image, read_image, read_program, save_image, write_image

__all__ = [
    "SourceUnit",
    "assemble",
    "assemble_file",
    "disassemble",
    "format_instruction",
    "load_image",
    "read_image",
    "read_program",
    "save_image",
    "write_image",
]
