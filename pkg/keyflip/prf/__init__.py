"""Program keys and the keyed branch-reversal hash."""

from keyflip.prf.hashing import flip_set, hash_bit, mix64
from keyflip.prf.keys import HashSpec, ProgramKey

__all__ = ["HashSpec", "ProgramKey", "flip_set", "hash_bit", "mix64"]
