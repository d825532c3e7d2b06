"""Keyed branch reversal, mask sidecars and pairing verification."""

from keyflip.obfuscate.mask import (
    MaskStream,
    load_mask,
    make_mask,
    read_mask,
    save_mask,
    write_mask,
)
from keyflip.obfuscate.obfuscator import ObfuscationReport, obfuscate_image
from keyflip.obfuscate.verify import PairingMismatch, find_pairing_mismatch, verify_pairing

__all__ = [
    "MaskStream",
    "ObfuscationReport",
    "PairingMismatch",
    "find_pairing_mismatch",
    "load_mask",
    "make_mask",
    "obfuscate_image",
    "read_mask",
    "save_mask",
    "verify_pairing",
    "write_mask",
]
