"""
Integer register names for RV32I.
"""

from enum import IntEnum

ABI_NAMES: tuple[str, ...] = (
    "zero", "ra", "sp", "gp", "tp", "t0", "t1", "t2",
    "s0", "s1", "a0", "a1", "a2", "a3", "a4", "a5",
    "a6", "a7", "s2", "s3", "s4", "s5", "s6", "s7",
    "s8", "s9", "s10", "s11", "t3", "t4", "t5", "t6",
)  # fmt: skip


class Register(IntEnum):
    """One of the 32 integer registers x0..x31."""

    X0 = 0
    X1 = 1
    X2 = 2
    X3 = 3
    X4 = 4
    X5 = 5
    X6 = 6
    X7 = 7
    X8 = 8
    X9 = 9
    X10 = 10
    X11 = 11
    X12 = 12
    X13 = 13
    X14 = 14
    X15 = 15
    X16 = 16
    X17 = 17
    X18 = 18
    X19 = 19
    X20 = 20
    X21 = 21
    X22 = 22
    X23 = 23
    X24 = 24
    X25 = 25
    X26 = 26
    X27 = 27
    X28 = 28
    X29 = 29
    X30 = 30
    X31 = 31

    @property
    def abi(self) -> str:
        return ABI_NAMES[self.value]

    def __str__(self) -> str:
        return f"x{self.value}"

    def __format__(self, format_spec: str) -> str:
        return format(str(self), format_spec)


_NAME_TO_REGISTER: dict[str, Register] = {
    **{f"x{i}": Register(i) for i in range(32)},
    **{name: Register(i) for i, name in enumerate(ABI_NAMES)},
    "fp": Register.X8,
}


def parse_register(name: str) -> Register:
    """Resolve an ABI (``a0``) or numeric (``x10``) register name.

    Raises:
        KeyError: if the name is not a register
    """
    return _NAME_TO_REGISTER[name.strip().lower()]
