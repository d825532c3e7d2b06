"""
keyflip simulate: run an image on one core and print its counters.

The process exit code is the program's own exit code.
"""

import argparse
from pathlib import Path

from keyflip.asm.image_file import read_program
from keyflip.cli.options import build_arch, max_cycles
from keyflip.sim.config import ArchKind
from keyflip.sim.runner import run as simulate
from keyflip.sim.runner import write_trace


def register(subparsers: argparse._SubParsersAction, parents: list) -> None:
    parser = subparsers.add_parser(
        "simulate", parents=parents, help="run an image on the pipeline model"
    )
    parser.add_argument("image", type=Path, help=".rvimg image or .s source")
    parser.add_argument(
        "--arch",
        choices=[kind.value for kind in ArchKind],
        default=ArchKind.BASELINE.value,
        help="core variant (default baseline)",
    )
    parser.add_argument("--mask", type=Path, help="mask sidecar for --arch mask")
    parser.add_argument("--trace", type=Path, help="write the retired-instruction trace here")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    arch = build_arch(args)
    image = read_program(args.image)
    state, stats, trace = simulate(image, arch, max_cycles(args))

    if args.trace:
        write_trace(trace, args.trace)

    extra: dict[str, object] = {"arch": arch.label, "exit_code": state.exit_code}
    if stats.cache_hit_rate is not None:
        extra["cache_hit_rate"] = f"{stats.cache_hit_rate:.4f}"
    extra["output"] = bytes(state.output).hex()
    print(stats.to_kv(extra), end="")
    return state.exit_code or 0
