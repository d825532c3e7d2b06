"""
Configuration management using Pydantic Settings.
Supports environment-specific configs (development, testing, production).
"""

import re
from functools import lru_cache
from typing import Any, Literal

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

KEY_PATTERN = re.compile(r"^[0-9a-fA-F]{32}$")


class Settings(BaseSettings):
    """Base settings class with common configuration."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="KEYFLIP_",
        case_sensitive=False,
        extra="ignore",
    )

    # Environment
    ENVIRONMENT: Literal["development", "testing", "production"] = "development"

    # Application
    APP_NAME: str = "keyflip"
    APP_VERSION: str = "0.1.0"
    DEBUG: bool = False

    # Logging
    LOG_LEVEL: str = "WARNING"
    LOG_FORMAT: Literal["json", "console"] = "json"

    # Trusted-core model
    HASH_LATENCY: int = 16
    CACHE_LINES: int = 256
    MAX_CYCLES: int = 50_000_000

    # Benchmark harness
    BENCH_KEY: str = "00112233445566778899aabbccddeeff"
    BENCH_LATENCIES: str = "8,16"
    BENCH_WORKERS: int = 1

    @field_validator("HASH_LATENCY", "MAX_CYCLES", "BENCH_WORKERS")
    @classmethod
    def validate_positive(cls, v: int, info) -> int:
        """Ensure counters and latencies are at least one."""
        if v < 1:
            raise ValueError(f"{info.field_name} must be >= 1")
        return v

    @field_validator("CACHE_LINES")
    @classmethod
    def validate_cache_lines(cls, v: int) -> int:
        """The hash cache is direct-mapped and indexed by address bits."""
        if v < 1 or v & (v - 1):
            raise ValueError("CACHE_LINES must be a positive power of two")
        return v

    @field_validator("BENCH_KEY")
    @classmethod
    def validate_bench_key(cls, v: str) -> str:
        """Ensure BENCH_KEY is a 128-bit hex key."""
        if not KEY_PATTERN.match(v):
            raise ValueError("BENCH_KEY must be exactly 32 hex digits")
        return v.lower()

    @field_validator("BENCH_LATENCIES", mode="before")
    @classmethod
    def parse_latencies(cls, v: Any) -> str:
        """Accept a list or a comma-separated string of positive latencies."""
        if isinstance(v, (list, tuple)):
            v = ",".join(str(item) for item in v)
        values = [item.strip() for item in str(v).split(",") if item.strip()]
        if not values or not all(item.isdigit() and int(item) >= 1 for item in values):
            raise ValueError("BENCH_LATENCIES must be comma-separated positive integers")
        return ",".join(values)

    @property
    def bench_latencies(self) -> list[int]:
        """Hash latencies swept by the benchmark harness."""
        return [int(item) for item in self.BENCH_LATENCIES.split(",")]


class DevelopmentSettings(Settings):
    """Development environment settings."""

    DEBUG: bool = True
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: Literal["json", "console"] = "console"


class TestingSettings(Settings):
    """Testing environment settings."""

    DEBUG: bool = True
    LOG_FORMAT: Literal["json", "console"] = "console"


class ProductionSettings(Settings):
    """Production environment settings."""

    DEBUG: bool = False
    LOG_FORMAT: Literal["json", "console"] = "json"


@lru_cache
def get_settings() -> Settings:
    """
    Get settings instance based on KEYFLIP_ENVIRONMENT.
    Cached to avoid re-reading environment variables.
    """
    import os

    environment = os.getenv("KEYFLIP_ENVIRONMENT", "development").lower()

    settings_map = {
        "development": DevelopmentSettings,
        "testing": TestingSettings,
        "production": ProductionSettings,
    }

    settings_class = settings_map.get(environment, DevelopmentSettings)
    return settings_class()


# Global settings instance
settings = get_settings()
