"""
keyflip bench: the corpus on every core, as CSV and a Markdown table.
"""

import argparse
from pathlib import Path

import structlog

from keyflip.benchmarks.corpus import get_benchmark, load_corpus
from keyflip.cli.options import cache_lines, max_cycles, positive_int
from keyflip.core.config import settings
from keyflip.core.exceptions import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, KeyflipError
from keyflip.services.bench_service import BenchService, to_csv, to_markdown

logger = structlog.get_logger(__name__)


def latency_list(text: str) -> list[int]:
    return [positive_int(item) for item in text.split(",") if item.strip()]


def register(subparsers: argparse._SubParsersAction, parents: list) -> None:
    parser = subparsers.add_parser(
        "bench", parents=parents, help="measure the bundled corpus on every core"
    )
    parser.add_argument("--out", type=Path, help="CSV report path (default: stdout)")
    parser.add_argument("--markdown", type=Path, help="also write the Markdown table here")
    parser.add_argument(
        "--latencies",
        type=latency_list,
        default=None,
        help=f"comma-separated hash latencies (default {settings.BENCH_LATENCIES})",
    )
    parser.add_argument("--workers", type=positive_int, default=None, help="parallel workers")
    parser.add_argument(
        "--benchmark",
        action="append",
        dest="benchmarks",
        metavar="NAME",
        help="restrict to this benchmark (repeatable)",
    )
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    specs = load_corpus()
    if args.benchmarks:
        try:
            specs = [get_benchmark(name) for name in args.benchmarks]
        except KeyError as exc:
            raise KeyflipError(f"unknown benchmark {exc.args[0]}", EXIT_USAGE) from None

    service = BenchService(
        key=args.key,
        latencies=args.latencies,
        cache_lines=cache_lines(args),
        max_cycles=max_cycles(args),
        workers=args.workers,
    )
    rows = service.run(specs)

    csv_text = to_csv(rows)
    markdown = to_markdown(rows)
    if args.out:
        args.out.write_text(csv_text, encoding="utf-8")
        print(markdown, end="")
    else:
        print(csv_text, end="")
    if args.markdown:
        args.markdown.write_text(markdown, encoding="utf-8")

    failed = [row for row in rows if row.failed]
    logger.info("bench_finished", rows=len(rows), failed=len(failed))
    return EXIT_FAILURE if failed else EXIT_OK
