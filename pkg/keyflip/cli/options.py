"""
Shared command-line options and their resolution into domain objects.
"""

import argparse

from keyflip.core.config import settings
from keyflip.core.exceptions import EXIT_USAGE, KeyflipError
from keyflip.obfuscate.mask import read_mask
from keyflip.prf.keys import ProgramKey
from keyflip.sim.config import ArchKind, MicroArchConfig


def key_type(text: str) -> ProgramKey:
    """argparse type for --key: exactly 32 hex digits."""
    try:
        return ProgramKey.from_hex(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def positive_int(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{text}'") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def power_of_two(text: str) -> int:
    value = positive_int(text)
    if value & (value - 1):
        raise argparse.ArgumentTypeError(f"expected a power of two, got {value}")
    return value


COMMON_DEFAULTS: dict[str, object] = {
    "key": None,
    "hash_latency": None,
    "cache_lines": None,
    "max_cycles": None,
}


def add_common_options(parser: argparse.ArgumentParser) -> None:
    """
    Flags accepted before and after the subcommand. Defaults are SUPPRESS
    on both copies; the top-level parser supplies COMMON_DEFAULTS.
    """
    group = parser.add_argument_group("common options")
    group.add_argument(
        "--key",
        type=key_type,
        default=argparse.SUPPRESS,
        help="128-bit program key as 32 hex digits",
    )
    group.add_argument(
        "--hash-latency",
        type=positive_int,
        default=argparse.SUPPRESS,
        help=f"hash unit latency in cycles (default {settings.HASH_LATENCY})",
    )
    group.add_argument(
        "--cache-lines",
        type=power_of_two,
        default=argparse.SUPPRESS,
        help=f"hash cache lines (default {settings.CACHE_LINES})",
    )
    group.add_argument(
        "--max-cycles",
        type=positive_int,
        default=argparse.SUPPRESS,
        help=f"cycle budget per run (default {settings.MAX_CYCLES})",
    )


def common_options() -> argparse.ArgumentParser:
    """Parent parser carrying the common flags for every subcommand."""
    parent = argparse.ArgumentParser(add_help=False)
    add_common_options(parent)
    return parent


def require_key(args: argparse.Namespace) -> ProgramKey:
    if args.key is None:
        raise KeyflipError("this command requires --key", EXIT_USAGE)
    return args.key


def hash_latency(args: argparse.Namespace) -> int:
    return args.hash_latency or settings.HASH_LATENCY


def cache_lines(args: argparse.Namespace) -> int:
    return args.cache_lines or settings.CACHE_LINES


def max_cycles(args: argparse.Namespace) -> int:
    return args.max_cycles or settings.MAX_CYCLES


def build_arch(args: argparse.Namespace) -> MicroArchConfig:
    """
    MicroArchConfig from --arch and the common options.

    Raises:
        MissingKey: stalled/cached without --key
        MissingMask: mask without --mask
    """
    kind = ArchKind(args.arch)
    mask = read_mask(args.mask) if getattr(args, "mask", None) else None
    return MicroArchConfig(
        kind=kind,
        key=args.key if kind.uses_hash else None,
        mask=mask if kind is ArchKind.MASK else None,
        hash={"latency_cycles": hash_latency(args)},
        cache_lines=cache_lines(args),
    )
