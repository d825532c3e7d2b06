"""
Custom exception classes and the command-line exception handler.
"""

import structlog
from pydantic import ValidationError

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_CYCLE_LIMIT = 3


class KeyflipError(Exception):
    """Base exception for keyflip."""

    def __init__(self, message: str, exit_code: int = EXIT_FAILURE):
        self.message = message
        self.exit_code = exit_code
        super().__init__(self.message)


# ISA / codec


class UnsupportedInstruction(KeyflipError):
    """Word outside the supported RV32I subset, or malformed."""

    def __init__(self, word: int, addr: int | None = None, reason: str = "unsupported"):
        self.word = word & 0xFFFFFFFF
        self.addr = addr
        where = f" at 0x{addr:08x}" if addr is not None else ""
        super().__init__(f"{reason} instruction word 0x{self.word:08x}{where}")

    def at(self, addr: int) -> "UnsupportedInstruction":
        """Return a copy of this error located at addr."""
        return UnsupportedInstruction(self.word, addr)


class RangeError(KeyflipError):
    """Immediate or offset not encodable."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class NotABranch(KeyflipError):
    """Operation requires a conditional branch."""

    def __init__(self, message: str = "instruction is not a conditional branch"):
        super().__init__(message)


# Assembler / file formats


class ParseError(KeyflipError):
    """Syntax error in assembly source."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class UndefinedLabel(KeyflipError):
    """Reference to a label that is never defined."""

    def __init__(self, name: str, line: int | None = None):
        self.name = name
        self.line = line
        suffix = f" (line {line})" if line is not None else ""
        super().__init__(f"undefined label '{name}'{suffix}")


class DuplicateLabel(KeyflipError):
    """Label defined more than once."""

    def __init__(self, name: str, line: int | None = None):
        self.name = name
        self.line = line
        suffix = f" (line {line})" if line is not None else ""
        super().__init__(f"duplicate label '{name}'{suffix}")


class FormatError(KeyflipError):
    """Malformed image or mask file."""

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(f"format error: {reason}")


# Obfuscation


class ShapeMismatch(KeyflipError):
    """Two images that should pair do not share base and length."""

    def __init__(self, message: str = "images differ in base address or length"):
        super().__init__(message)


class MaskError(KeyflipError):
    """Mask stream violates its invariants for the given image."""


class VerificationFailed(KeyflipError):
    """An obfuscated image does not pair with its original."""

    def __init__(self, message: str, addr: int | None = None, index: int | None = None):
        self.addr = addr
        self.index = index
        super().__init__(message)


# Simulation


class MemFault(KeyflipError):
    """Access outside the mapped segments."""

    def __init__(self, addr: int, reason: str = "unmapped access"):
        self.addr = addr & 0xFFFFFFFF
        super().__init__(f"{reason} at 0x{self.addr:08x}")


class MissingKey(KeyflipError):
    """Hash-based trusted core configured without a program key."""

    def __init__(self, arch: str):
        super().__init__(f"architecture '{arch}' requires a program key")


class MissingMask(KeyflipError):
    """Mask-based trusted core configured without a mask stream."""

    def __init__(self, arch: str = "mask"):
        super().__init__(f"architecture '{arch}' requires a mask stream")


class UnsupportedSyscall(KeyflipError):
    """ECALL with a service number the machine does not provide."""

    def __init__(self, service: int, addr: int):
        self.service = service
        self.addr = addr
        super().__init__(f"unsupported ecall service a7={service} at 0x{addr:08x}")


class CycleLimitExceeded(KeyflipError):
    """Program did not halt within the cycle budget."""

    def __init__(self, max_cycles: int):
        self.max_cycles = max_cycles
        super().__init__(f"program did not halt within {max_cycles} cycles", EXIT_CYCLE_LIMIT)


def handle_cli_exception(exc: BaseException) -> int:
    """Log an exception raised by a command and map it to an exit code."""
    if isinstance(exc, KeyflipError):
        logger.error(
            "keyflip_exception",
            exception=exc.__class__.__name__,
            message=exc.message,
            exit_code=exc.exit_code,
        )
        return exc.exit_code

    if isinstance(exc, ValidationError):
        logger.warning("invalid_configuration", errors=exc.error_count(), detail=str(exc))
        return EXIT_USAGE

    logger.exception(
        "unhandled_exception",
        exception=exc.__class__.__name__,
        message=str(exc),
    )
    return EXIT_FAILURE
