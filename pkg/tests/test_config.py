"""
Tests for settings and core-variant configuration.
"""

import pytest
from pydantic import ValidationError

from keyflip.core.config import Settings, TestingSettings
from keyflip.core.exceptions import MissingKey, MissingMask
from keyflip.obfuscate.mask import MaskStream
from keyflip.prf.keys import ProgramKey
from keyflip.sim.config import ArchKind, MicroArchConfig


@pytest.mark.unit
def test_testing_settings_defaults(test_settings: TestingSettings) -> None:
    """Test the documented defaults of the trusted-core model."""
    assert test_settings.HASH_LATENCY == 16
    assert test_settings.CACHE_LINES == 256
    assert test_settings.MAX_CYCLES == 50_000_000
    assert test_settings.BENCH_KEY == "00112233445566778899aabbccddeeff"
    assert test_settings.bench_latencies == [8, 16]


@pytest.mark.unit
def test_settings_read_environment(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test that KEYFLIP_-prefixed variables override defaults."""
    monkeypatch.setenv("KEYFLIP_HASH_LATENCY", "8")
    monkeypatch.setenv("KEYFLIP_BENCH_LATENCIES", "4, 12")
    settings = Settings()
    assert settings.HASH_LATENCY == 8
    assert settings.bench_latencies == [4, 12]


@pytest.mark.unit
@pytest.mark.parametrize(
    "field,value",
    [
        ("CACHE_LINES", 100),
        ("CACHE_LINES", 0),
        ("HASH_LATENCY", 0),
        ("MAX_CYCLES", -1),
        ("BENCH_KEY", "0011"),
        ("BENCH_LATENCIES", "8,zero"),
    ],
)
def test_settings_reject_bad_values(field: str, value: object) -> None:
    """Test that invalid settings fail validation."""
    with pytest.raises(ValidationError):
        Settings(**{field: value})


@pytest.mark.unit
def test_bench_key_is_lowercased() -> None:
    """Test BENCH_KEY normalization."""
    settings = Settings(BENCH_KEY="00112233445566778899AABBCCDDEEFF")
    assert settings.BENCH_KEY == "00112233445566778899aabbccddeeff"


@pytest.mark.unit
def test_latency_list_accepted() -> None:
    """Test BENCH_LATENCIES given as a list."""
    assert Settings(BENCH_LATENCIES=[2, 4]).bench_latencies == [2, 4]


@pytest.mark.unit
def test_arch_labels() -> None:
    """Test report labels for every core variant."""
    key = ProgramKey(k_hi=1, k_lo=2)
    mask = MaskStream(base_addr=0x1000, bits=(0, 0))
    assert MicroArchConfig.baseline().label == "baseline"
    assert MicroArchConfig.stalled(key, 8).label == "stalled-8"
    assert MicroArchConfig.cached(key, 16).label == "cached-16"
    assert MicroArchConfig.masked(mask).label == "mask"


@pytest.mark.unit
@pytest.mark.parametrize("kind", [ArchKind.STALLED, ArchKind.CACHED])
def test_hash_arch_requires_key(kind: ArchKind) -> None:
    """Test that hash-based cores refuse to exist without a key."""
    with pytest.raises(MissingKey):
        MicroArchConfig(kind=kind)


@pytest.mark.unit
def test_mask_arch_requires_mask() -> None:
    """Test that the mask core refuses to exist without a mask."""
    with pytest.raises(MissingMask):
        MicroArchConfig(kind=ArchKind.MASK)


@pytest.mark.unit
def test_baseline_ignores_key() -> None:
    """Test that baseline accepts, and never needs, a key."""
    config = MicroArchConfig(kind=ArchKind.BASELINE, key=ProgramKey(k_hi=0, k_lo=0))
    config.require_inputs()
    assert not config.kind.uses_hash


@pytest.mark.unit
def test_cache_lines_must_be_power_of_two() -> None:
    """Test cache size validation on the core config."""
    with pytest.raises(ValidationError):
        MicroArchConfig.cached(ProgramKey(k_hi=0, k_lo=0), cache_lines=96)
