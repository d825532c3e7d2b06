"""
keyflip disasm: image back to assembly that reassembles to the same words.
"""

import argparse
from pathlib import Path

from keyflip.asm.disassembler import disassemble
from keyflip.asm.image_file import read_image
from keyflip.core.exceptions import EXIT_OK


def register(subparsers: argparse._SubParsersAction, parents: list) -> None:
    parser = subparsers.add_parser("disasm", parents=parents, help="disassemble a .rvimg image")
    parser.add_argument("image", type=Path, help=".rvimg image")
    parser.add_argument("-o", "--out", type=Path, help="write the listing here instead of stdout")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    listing = disassemble(read_image(args.image)).text
    if args.out:
        args.out.write_text(listing, encoding="utf-8")
    else:
        print(listing, end="")
    return EXIT_OK
