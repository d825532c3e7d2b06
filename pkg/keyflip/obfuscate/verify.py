"""
Static pairing check between an original image and its obfuscated form.
"""

from dataclasses import dataclass

import structlog

from keyflip.core.exceptions import ShapeMismatch
from keyflip.isa.codec import encode, try_decode
from keyflip.isa.image import ProgramImage
from keyflip.isa.instructions import Branch, complement_branch
from keyflip.prf.hashing import hash_bit
from keyflip.prf.keys import ProgramKey

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class PairingMismatch:
    addr: int
    expected: int
    actual: int
    reason: str


def find_pairing_mismatch(
    original: ProgramImage, obfuscated: ProgramImage, key: ProgramKey
) -> PairingMismatch | None:
    """First address at which obfuscated is not the keyed rewrite of original.

    Raises:
        ShapeMismatch: different base, length, entry or data
    """
    if (
        original.base_addr != obfuscated.base_addr
        or len(original.code) != len(obfuscated.code)
        or original.entry != obfuscated.entry
        or original.data_base != obfuscated.data_base
        or original.data != obfuscated.data
    ):
        raise ShapeMismatch()

    for index, (orig_word, obf_word) in enumerate(zip(original.code, obfuscated.code)):
        addr = original.addr_of(index)
        instr = try_decode(orig_word)
        if isinstance(instr, Branch) and hash_bit(key, addr):
            expected = encode(complement_branch(instr))
            reason = "branch not reversed"
        else:
            expected = orig_word
            reason = "branch unexpectedly changed" if isinstance(instr, Branch) else "word changed"
        if obf_word != expected:
            return PairingMismatch(addr, expected, obf_word, reason)
    return None


def verify_pairing(original: ProgramImage, obfuscated: ProgramImage, key: ProgramKey) -> bool:
    """True iff obfuscated equals the keyed rewrite of original word for word.

    Raises:
        ShapeMismatch: different base, length, entry or data
    """
    mismatch = find_pairing_mismatch(original, obfuscated, key)
    if mismatch is not None:
        logger.info(
            "pairing_mismatch",
            addr=f"0x{mismatch.addr:08x}",
            reason=mismatch.reason,
            key_fingerprint=key.fingerprint(),
        )
        return False
    return True
