"""
Command-line interface: one argparse subcommand per module in commands/.
"""

import argparse

from keyflip import __version__
from keyflip.cli.commands import assemble, bench, disasm, obfuscate, simulate, verify
from keyflip.cli.options import COMMON_DEFAULTS, add_common_options, common_options

COMMANDS = (assemble, obfuscate, simulate, verify, bench, disasm)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="keyflip",
        description="Keyed branch-reversal obfuscation and trusted-core pipeline model.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", help="override KEYFLIP_LOG_LEVEL")
    parser.add_argument("--log-format", choices=["json", "console"], help="log renderer")
    add_common_options(parser)
    parser.set_defaults(**COMMON_DEFAULTS)

    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    parents = [common_options()]
    for command in COMMANDS:
        command.register(subparsers, parents)
    return parser
