"""
Text serialization of ProgramImage (`.rvimg`).

    RVIMG v1
    base 00001000
    entry 00001000
    data_base 00002000
    CODE
    00000013
    ...
    DATA
    0102030405...        (up to 32 bytes per line)

All hex is lowercase.
"""

from pathlib import Path

from keyflip.core.exceptions import FormatError, KeyflipError
from keyflip.isa.image import ProgramImage

MAGIC = "RVIMG"
VERSION = "v1"
DATA_BYTES_PER_LINE = 32


def save_image(image: ProgramImage) -> str:
    """Serialize an image to its text form."""
    lines = [
        f"{MAGIC} {VERSION}",
        f"base {image.base_addr:08x}",
        f"entry {image.entry:08x}",
        f"data_base {image.data_base:08x}",
        "CODE",
        *(f"{word:08x}" for word in image.code),
        "DATA",
    ]
    for start in range(0, len(image.data), DATA_BYTES_PER_LINE):
        lines.append(image.data[start : start + DATA_BYTES_PER_LINE].hex())
    return "\n".join(lines) + "\n"


def _header_field(lines: list[str], index: int, name: str) -> int:
    if index >= len(lines):
        raise FormatError(f"missing '{name}' field")
    parts = lines[index].split()
    if len(parts) != 2 or parts[0] != name:
        raise FormatError(f"expected '{name} <hex>' on line {index + 1}")
    try:
        return int(parts[1], 16)
    except ValueError:
        raise FormatError(f"'{name}' is not hex: {parts[1]}") from None


def load_image(text: str) -> ProgramImage:
    """Parse the text form back into a ProgramImage.

    Raises:
        FormatError: bad header, version, hex or misaligned addresses
    """
    lines = [line.strip() for line in text.splitlines()]
    while lines and not lines[-1]:
        lines.pop()
    if not lines:
        raise FormatError("empty image file")

    header = lines[0].split()
    if len(header) != 2 or header[0] != MAGIC:
        raise FormatError(f"missing {MAGIC} header")
    if header[1] != VERSION:
        raise FormatError(f"unsupported image version {header[1]}")

    base = _header_field(lines, 1, "base")
    entry = _header_field(lines, 2, "entry")
    data_base = _header_field(lines, 3, "data_base")
    if base % 4:
        raise FormatError(f"base 0x{base:x} is not 4-byte aligned")
    if entry % 4:
        raise FormatError(f"entry 0x{entry:x} is not 4-byte aligned")

    if len(lines) < 5 or lines[4] != "CODE":
        raise FormatError("missing CODE section")
    try:
        data_marker = lines.index("DATA", 5)
    except ValueError:
        raise FormatError("missing DATA section") from None

    code: list[int] = []
    for number, line in enumerate(lines[5:data_marker], start=6):
        if len(line) != 8:
            raise FormatError(f"line {number}: code words are 8 hex digits")
        try:
            code.append(int(line, 16))
        except ValueError:
            raise FormatError(f"line {number}: not hex: {line}") from None

    data = bytearray()
    for number, line in enumerate(lines[data_marker + 1 :], start=data_marker + 2):
        try:
            data += bytes.fromhex(line)
        except ValueError:
            raise FormatError(f"line {number}: bad data bytes") from None

    try:
        return ProgramImage(
            base_addr=base, code=tuple(code), entry=entry, data_base=data_base, data=bytes(data)
        )
    except FormatError:
        raise
    except KeyflipError as exc:
        raise FormatError(exc.message) from None


def write_image(image: ProgramImage, path: str | Path) -> None:
    Path(path).write_text(save_image(image), encoding="utf-8")


def read_image(path: str | Path) -> ProgramImage:
    return load_image(Path(path).read_text(encoding="utf-8"))


def read_program(path: str | Path) -> ProgramImage:
    """Load a `.rvimg` image, or assemble anything else as `.s` source."""
    from keyflip.asm.assembler import assemble_file

    path = Path(path)
    if path.suffix == ".rvimg":
        return read_image(path)
    return assemble_file(path)
