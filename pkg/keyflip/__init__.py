"""Keyed branch-reversal obfuscation toolchain and trusted-core pipeline simulator."""

__version__ = "0.1.0"
