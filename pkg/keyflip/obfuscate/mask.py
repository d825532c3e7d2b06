"""
Mask sidecar for the mask-based trusted core.

One bit per code word; bit i set means "reverse the branch at base + 4*i".
The sidecar ships with the obfuscated image. It is stored in plaintext:
the `encrypted` header field exists so an encryption scheme can be added
without changing the format version.

    RVMASK v1
    base 00001000
    words 12
    encrypted: none
    bits 2400
"""

from dataclasses import dataclass
from pathlib import Path

from keyflip.core.exceptions import FormatError, MaskError
from keyflip.isa.image import ProgramImage
from keyflip.isa.instructions import Branch
from keyflip.prf.hashing import flip_set
from keyflip.prf.keys import ProgramKey

MAGIC = "RVMASK"
VERSION = "v1"
ENCRYPTION_NONE = "none"


@dataclass(frozen=True)
class MaskStream:
    base_addr: int
    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(bit not in (0, 1) for bit in self.bits):
            raise MaskError("mask bits must be 0 or 1")

    def __len__(self) -> int:
        return len(self.bits)

    def bit_at(self, addr: int) -> int:
        return self.bits[(addr - self.base_addr) // 4]

    def popcount(self) -> int:
        return sum(self.bits)

    def set_addresses(self) -> frozenset[int]:
        return frozenset(self.base_addr + 4 * i for i, bit in enumerate(self.bits) if bit)

    def validate_for(self, image: ProgramImage) -> None:
        """Check shape against image and that set bits sit on conditional branches.

        Raises:
            MaskError: on any violation
        """
        if self.base_addr != image.base_addr:
            raise MaskError(
                f"mask base 0x{self.base_addr:08x} != image base 0x{image.base_addr:08x}"
            )
        if len(self.bits) != len(image.code):
            raise MaskError(f"mask has {len(self.bits)} bits for {len(image.code)} code words")
        for addr in self.set_addresses():
            if not isinstance(image.instruction_at(addr), Branch):
                raise MaskError(f"mask bit set at non-branch address 0x{addr:08x}")


def make_mask(original: ProgramImage, key: ProgramKey) -> MaskStream:
    """Mask whose set bits are exactly flip_set(key, original)."""
    flips = flip_set(key, original)
    bits = tuple(1 if original.addr_of(i) in flips else 0 for i in range(len(original.code)))
    return MaskStream(base_addr=original.base_addr, bits=bits)


def _pack(bits: tuple[int, ...]) -> bytes:
    out = bytearray((len(bits) + 7) // 8)
    for i, bit in enumerate(bits):
        if bit:
            out[i // 8] |= 0x80 >> (i % 8)
    return bytes(out)


def save_mask(mask: MaskStream) -> str:
    return (
        f"{MAGIC} {VERSION}\n"
        f"base {mask.base_addr:08x}\n"
        f"words {len(mask.bits)}\n"
        f"encrypted: {ENCRYPTION_NONE}\n"
        f"bits {_pack(mask.bits).hex()}\n"
    )


def load_mask(text: str) -> MaskStream:
    """Parse a `.mask` sidecar.

    Raises:
        FormatError: malformed header, unknown encryption or bad bit string
    """
    lines = [line.strip() for line in text.strip().splitlines()]
    if len(lines) != 5:
        raise FormatError("mask file must have exactly 5 lines")
    if lines[0] != f"{MAGIC} {VERSION}":
        raise FormatError(f"expected '{MAGIC} {VERSION}' header")

    fields: dict[str, str] = {}
    for line in lines[1:]:
        name, _, value = line.partition(" ")
        fields[name.rstrip(":")] = value.strip()

    if fields.get("encrypted") != ENCRYPTION_NONE:
        raise FormatError(f"unsupported mask encryption '{fields.get('encrypted')}'")
    try:
        base = int(fields["base"], 16)
        words = int(fields["words"])
        packed = bytes.fromhex(fields["bits"])
    except KeyError as exc:
        raise FormatError(f"missing mask field {exc.args[0]}") from None
    except ValueError:
        raise FormatError("malformed mask field") from None

    if base % 4:
        raise FormatError(f"mask base 0x{base:x} is not 4-byte aligned")
    if len(packed) != (words + 7) // 8:
        raise FormatError(f"bit string holds {len(packed) * 8} bits for {words} words")

    bits = tuple((packed[i // 8] >> (7 - i % 8)) & 1 for i in range(words))
    if _pack(bits) != packed:
        raise FormatError("padding bits must be zero")
    return MaskStream(base_addr=base, bits=bits)


def write_mask(mask: MaskStream, path: str | Path) -> None:
    Path(path).write_text(save_mask(mask), encoding="utf-8")


def read_mask(path: str | Path) -> MaskStream:
    return load_mask(Path(path).read_text(encoding="utf-8"))
