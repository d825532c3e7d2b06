"""
Keyed branch-reversal pass over assembled images.

Layout never changes: a flipped branch keeps its registers and offset and only
its condition code is complemented, so every address the hardware hashes is
the address the obfuscator hashed.
"""

import structlog
from pydantic import BaseModel, ConfigDict, model_validator

from keyflip.isa.codec import encode
from keyflip.isa.image import ProgramImage
from keyflip.isa.instructions import complement_branch
from keyflip.prf.hashing import flip_set
from keyflip.prf.keys import ProgramKey

logger = structlog.get_logger(__name__)


class ObfuscationReport(BaseModel):
    """Summary of one obfuscation run. Never carries the key itself."""

    model_config = ConfigDict(frozen=True)

    total_branches: int
    flipped: int
    flipped_addresses: tuple[int, ...]
    key_fingerprint: str

    @model_validator(mode="after")
    def check_counts(self) -> "ObfuscationReport":
        if self.flipped > self.total_branches:
            raise ValueError("flipped exceeds total_branches")
        if self.flipped != len(self.flipped_addresses):
            raise ValueError("flipped must equal the number of flipped addresses")
        if list(self.flipped_addresses) != sorted(self.flipped_addresses):
            raise ValueError("flipped_addresses must be sorted")
        return self

    def render(self, source: str = "") -> str:
        """Human-readable report text."""
        lines = [
            f"source: {source}" if source else None,
            f"key_fingerprint: {self.key_fingerprint}",
            f"total_branches: {self.total_branches}",
            f"flipped: {self.flipped}",
            "flipped_addresses:",
            *(f"  0x{addr:08x}" for addr in self.flipped_addresses),
        ]
        return "\n".join(line for line in lines if line is not None) + "\n"


def obfuscate_image(
    image: ProgramImage, key: ProgramKey
) -> tuple[ProgramImage, ObfuscationReport]:
    """Complement every conditional branch whose keyed hash bit is 1.

    Raises:
        UnsupportedInstruction: carrying the address of the first bad word
    """
    branches = image.branch_addresses()
    flips = flip_set(key, image)

    code = list(image.code)
    for addr in flips:
        index = image.index_of(addr)
        code[index] = encode(complement_branch(image.instruction_at(addr)))

    report = ObfuscationReport(
        total_branches=len(branches),
        flipped=len(flips),
        flipped_addresses=tuple(sorted(flips)),
        key_fingerprint=key.fingerprint(),
    )
    logger.info(
        "image_obfuscated",
        words=len(image.code),
        total_branches=report.total_branches,
        flipped=report.flipped,
        key_fingerprint=report.key_fingerprint,
    )
    return image.with_code(code), report
