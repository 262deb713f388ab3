import argparse
import logging
import sys
from typing import List, NoReturn, Optional
from app.core.config import settings
from app.core.exceptions import EXIT_INPUT, EXIT_INTERNAL, InvalidParameterError, TopologyOptimizerError
from app.commands import bench, experiment, optimize, plan, simulate
from app.schemas.command import CommandConfig

logger = logging.getLogger(__name__)

COMMANDS = [optimize, plan, simulate, experiment, bench]


class CliParser(argparse.ArgumentParser):
    """Usage errors are input errors: exit 1, not argparse's 2"""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(
        prog="trieopt",
        description=f"{settings.APP_NAME} {settings.VERSION}: trie-based topology reconfiguration",
    )
    parser.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--version", action="version", version=settings.VERSION)
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def configure_logging(level: Optional[str] = None) -> None:
    level = (level or settings.LOG_LEVEL).upper()
    known = isinstance(logging.getLevelName(level), int)
    logging.basicConfig(
        level=level if known else logging.INFO,
        format=settings.LOG_FORMAT,
        stream=sys.stderr,
    )
    if not known:
        raise InvalidParameterError(f"Unknown log level '{level}'")


def domain_error_handler(exc: TopologyOptimizerError) -> int:
    logger.error(exc.detail)
    return exc.exit_code


def general_exception_handler(exc: Exception) -> int:
    logger.error(f"Unhandled exception: {str(exc)}", exc_info=True)
    return EXIT_INTERNAL


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        configure_logging(args.log_level)
        config = CommandConfig.from_namespace(args)
        return args.handler(config)
    except TopologyOptimizerError as exc:
        return domain_error_handler(exc)
    except Exception as exc:
        return general_exception_handler(exc)


if __name__ == "__main__":
    sys.exit(main())
