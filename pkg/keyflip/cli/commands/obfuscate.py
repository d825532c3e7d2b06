"""
keyflip obfuscate: keyed branch reversal of a program.

Writes the obfuscated image, its mask sidecar and a text report. Output
paths default to siblings of the input: <stem>.obf.rvimg, <stem>.mask and
<stem>.report.txt.
"""

import argparse
from pathlib import Path

import structlog

from keyflip.asm.image_file import read_program, write_image
from keyflip.cli.options import require_key
from keyflip.core.exceptions import EXIT_OK
from keyflip.obfuscate.mask import make_mask, write_mask
from keyflip.obfuscate.obfuscator import obfuscate_image

logger = structlog.get_logger(__name__)


def register(subparsers: argparse._SubParsersAction, parents: list) -> None:
    parser = subparsers.add_parser(
        "obfuscate", parents=parents, help="reverse branches selected by the program key"
    )
    parser.add_argument("input", type=Path, help=".s source or .rvimg image")
    parser.add_argument("-o", "--out", type=Path, help="obfuscated image path")
    parser.add_argument("--mask-out", type=Path, help="mask sidecar path")
    parser.add_argument("--report", type=Path, help="report path")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    key = require_key(args)
    original = read_program(args.input)
    obfuscated, report = obfuscate_image(original, key)

    stem = args.input.with_suffix("")
    out = args.out or stem.with_name(stem.name + ".obf.rvimg")
    mask_out = args.mask_out or stem.with_name(stem.name + ".mask")
    report_out = args.report or stem.with_name(stem.name + ".report.txt")

    text = report.render(source=str(args.input))
    write_image(obfuscated, out)
    write_mask(make_mask(original, key), mask_out)
    report_out.write_text(text, encoding="utf-8")

    logger.info(
        "obfuscation_written",
        image=str(out),
        mask=str(mask_out),
        report=str(report_out),
        key_fingerprint=report.key_fingerprint,
    )
    print(text, end="")
    return EXIT_OK
