"""
128-bit program keys.
"""

import hashlib
import secrets
from random import Random

from pydantic import BaseModel, ConfigDict, Field, PositiveInt

from keyflip.core.config import KEY_PATTERN

U64_MAX = (1 << 64) - 1


class ProgramKey(BaseModel):
    """The sole secret of the scheme: k_hi || k_lo."""

    model_config = ConfigDict(frozen=True)

    k_hi: int = Field(ge=0, le=U64_MAX)
    k_lo: int = Field(ge=0, le=U64_MAX)

    @classmethod
    def from_hex(cls, text: str) -> "ProgramKey":
        """Parse 32 hex digits, most significant first (k_hi then k_lo).

        Raises:
            ValueError: if text is not exactly 32 hex digits
        """
        text = text.strip()
        if not KEY_PATTERN.match(text):
            raise ValueError("program key must be exactly 32 hex digits")
        value = int(text, 16)
        return cls(k_hi=value >> 64, k_lo=value & U64_MAX)

    @classmethod
    def generate(cls, rng: Random | None = None) -> "ProgramKey":
        """Fresh random key; deterministic when an rng is supplied."""
        if rng is None:
            value = secrets.randbits(128)
        else:
            value = rng.getrandbits(128)
        return cls(k_hi=value >> 64, k_lo=value & U64_MAX)

    @property
    def value(self) -> int:
        return (self.k_hi << 64) | self.k_lo

    def to_hex(self) -> str:
        return f"{self.value:032x}"

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(16, "big")

    def fingerprint(self) -> str:
        """First 8 hex digits of SHA-256 over the key; safe to log."""
        return hashlib.sha256(self.to_bytes()).hexdigest()[:8]

    def flip_bit(self, bit: int) -> "ProgramKey":
        """Key differing in exactly one of its 128 bits."""
        value = self.value ^ (1 << bit)
        return ProgramKey(k_hi=value >> 64, k_lo=value & U64_MAX)

    def __repr__(self) -> str:
        return f"ProgramKey(fingerprint={self.fingerprint()})"

    __str__ = __repr__


class HashSpec(BaseModel):
    """Latency of the hardware hash unit, in cycles."""

    model_config = ConfigDict(frozen=True)

    latency_cycles: PositiveInt = 16
