"""RV32I subset: registers, instructions, codec and program images."""

from keyflip.isa.codec import decode, encode, try_decode
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
    complement_branch,
    to_signed,
)
from keyflip.isa.registers import Register, parse_register

__all__ = [
    "AluImm",
    "AluOp",
    "AluReg",
    "Auipc",
    "Branch",
    "BranchCond",
    "Ecall",
    "Instruction",
    "Jal",
    "Jalr",
    "Load",
    "LoadWidth",
    "Lui",
    "ProgramImage",
    "Register",
    "Store",
    "StoreWidth",
    "complement_branch",
    "decode",
    "encode",
    "parse_register",
    "to_signed",
    "try_decode",
]
