"""
Keyed one-bit hash H(addr, key), shared bit-exactly by the obfuscator and the
trusted-core model.

The mixer is the splitmix64 finalizer applied twice. It is balanced and
deterministic but not a cryptographic PRF; a production system would
substitute a keyed cryptographic function with the same interface.
"""

from keyflip.isa.image import ProgramImage
from keyflip.isa.instructions import Branch
from keyflip.prf.keys import ProgramKey

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """splitmix64 finalizer, modulo 2^64."""
    z &= MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & MASK64
    z ^= z >> 31
    return z


def hash_bit(key: ProgramKey, addr: int) -> int:
    """The reversal bit for the branch at byte address addr."""
    s1 = mix64(key.k_lo ^ (addr & 0xFFFFFFFF) ^ GOLDEN_GAMMA)
    s2 = mix64(s1 ^ key.k_hi)
    return s2 & 1


def flip_set(key: ProgramKey, image: ProgramImage) -> frozenset[int]:
    """Addresses of conditional branches whose hash bit is 1.

    Raises:
        UnsupportedInstruction: from decoding the image
    """
    return frozenset(
        addr
        for addr, instr in image.instructions()
        if isinstance(instr, Branch) and hash_bit(key, addr)
    )
