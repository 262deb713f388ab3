import argparse
import logging
import sys
from app.core.config import parse_int_list
from app.core.exceptions import EXIT_OK
from app.schemas.command import CommandConfig
from app.services import io_service
from app.services.experiment_service import complexity_probe

logger = logging.getLogger(__name__)

DEFAULT_BENCH_SIZES = "3..8"


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("bench", help="Operation counts on the worst-case instance")
    parser.add_argument("--sizes", help="Node counts, e.g. 3..8")
    parser.add_argument("--out", help="Output directory")
    parser.set_defaults(handler=cmd_bench, subcommand="bench")


def cmd_bench(config: CommandConfig) -> int:
    sizes = config.sizes or parse_int_list(DEFAULT_BENCH_SIZES)
    rows = complexity_probe(sizes)
    io_service.write_complexity_csv(config.out / "complexity.csv", rows)
    io_service.emit_csv(sys.stdout, io_service.COMPLEXITY_COLUMNS, io_service.complexity_rows(rows))
    return EXIT_OK
