"""
keyflip verify: check an obfuscated image against its original.

Static word-by-word pairing first, then differential runs on every
trusted core. Exit 0 only when everything agrees.
"""

import argparse
from pathlib import Path

from keyflip.asm.image_file import read_program
from keyflip.cli.options import cache_lines, hash_latency, max_cycles, require_key
from keyflip.core.exceptions import EXIT_OK
from keyflip.obfuscate.mask import read_mask
from keyflip.services.verification_service import VerificationService


def register(subparsers: argparse._SubParsersAction, parents: list) -> None:
    parser = subparsers.add_parser(
        "verify", parents=parents, help="verify an obfuscated image against its original"
    )
    parser.add_argument("original", type=Path, help="original .rvimg (or .s)")
    parser.add_argument("obfuscated", type=Path, help="obfuscated .rvimg")
    parser.add_argument("--mask", type=Path, help="mask sidecar (default: derived from --key)")
    parser.add_argument("--trace-dir", type=Path, help="dump diverging traces here")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    service = VerificationService(
        key=require_key(args),
        hash_latency=hash_latency(args),
        cache_lines=cache_lines(args),
        max_cycles=max_cycles(args),
        trace_dir=args.trace_dir,
    )
    mask = read_mask(args.mask) if args.mask else None
    service.verify(read_program(args.original), read_program(args.obfuscated), mask)
    print("verified: static pairing and all trusted cores agree")
    return EXIT_OK
