"""
keyflip assemble: RV32I source to `.rvimg`.
"""

import argparse
from pathlib import Path

import structlog

from keyflip.asm.assembler import assemble_file
from keyflip.asm.image_file import write_image
from keyflip.core.exceptions import EXIT_OK

logger = structlog.get_logger(__name__)


def register(subparsers: argparse._SubParsersAction, parents: list) -> None:
    parser = subparsers.add_parser(
        "assemble", parents=parents, help="assemble a .s file into a .rvimg image"
    )
    parser.add_argument("source", type=Path, help="assembly source")
    parser.add_argument("-o", "--out", type=Path, help="output image (default: <source>.rvimg)")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    image = assemble_file(args.source)
    out = args.out or args.source.with_suffix(".rvimg")
    write_image(image, out)
    logger.info("image_written", path=str(out), words=len(image.code), data=len(image.data))
    print(f"{out}: {len(image.code)} code words, {len(image.data)} data bytes")
    return EXIT_OK
