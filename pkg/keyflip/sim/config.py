"""
Microarchitecture selection for a simulation run.
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator, model_validator

from keyflip.core.exceptions import MissingKey, MissingMask
from keyflip.obfuscate.mask import MaskStream
from keyflip.prf.keys import HashSpec, ProgramKey


class ArchKind(str, Enum):
    BASELINE = "baseline"
    STALLED = "stalled"
    MASK = "mask"
    CACHED = "cached"

    @property
    def uses_hash(self) -> bool:
        return self in (ArchKind.STALLED, ArchKind.CACHED)


class MicroArchConfig(BaseModel):
    """
    One of the four core variants.

    Baseline ignores key and mask: it models commodity hardware running
    whatever image it is given. Construction raises MissingKey/MissingMask
    rather than a ValidationError.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: ArchKind = ArchKind.BASELINE
    hash: HashSpec = Field(default_factory=HashSpec)
    cache_lines: PositiveInt = 256
    key: ProgramKey | None = None
    mask: MaskStream | None = None

    @field_validator("cache_lines")
    @classmethod
    def validate_cache_lines(cls, v: int) -> int:
        if v & (v - 1):
            raise ValueError("cache_lines must be a power of two")
        return v

    @model_validator(mode="after")
    def check_inputs(self) -> "MicroArchConfig":
        self.require_inputs()
        return self

    def require_inputs(self) -> None:
        """
        Raises:
            MissingKey: stalled/cached without a key
            MissingMask: mask without a mask stream
        """
        if self.kind.uses_hash and self.key is None:
            raise MissingKey(self.kind.value)
        if self.kind is ArchKind.MASK and self.mask is None:
            raise MissingMask(self.kind.value)

    @property
    def label(self) -> str:
        """Report label: baseline, stalled-16, cached-8, mask."""
        if self.kind.uses_hash:
            return f"{self.kind.value}-{self.hash.latency_cycles}"
        return self.kind.value

    @classmethod
    def baseline(cls) -> "MicroArchConfig":
        return cls(kind=ArchKind.BASELINE)

    @classmethod
    def stalled(cls, key: ProgramKey, latency: int = 16) -> "MicroArchConfig":
        return cls(kind=ArchKind.STALLED, key=key, hash=HashSpec(latency_cycles=latency))

    @classmethod
    def cached(
        cls, key: ProgramKey, latency: int = 16, cache_lines: int = 256
    ) -> "MicroArchConfig":
        return cls(
            kind=ArchKind.CACHED,
            key=key,
            hash=HashSpec(latency_cycles=latency),
            cache_lines=cache_lines,
        )

    @classmethod
    def masked(cls, mask: MaskStream) -> "MicroArchConfig":
        return cls(kind=ArchKind.MASK, mask=mask)
