"""
AE-1SVM command line
Main entry point: python -m src.main <command> ...
"""

import argparse
import json
import sys
from typing import List, Optional

from loguru import logger

from src.cli.commands import benchmark, evaluate, explain, generate, score, train
from src.config import settings
from src.errors import Ae1SvmError

COMMANDS = [generate, train, score, explain, evaluate, benchmark]

LOG_FORMAT = "<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | {name}:{function} - {message}"


def configure_logging(level: str) -> None:
    """Route loguru to stderr and, when LOG_FILE is set, to a rotating file"""
    logger.remove()
    logger.add(sys.stderr, level=level.upper(), format=LOG_FORMAT)
    if settings.LOG_FILE:
        logger.add(settings.LOG_FILE, rotation="50 MB", retention="10 days", level=level.upper())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ae1svm",
        description=f"{settings.APP_NAME} {settings.APP_VERSION}: autoencoder + one-class SVM anomaly detection",
    )
    parser.add_argument("--log-level", default=None, help=f"Log level (default {settings.LOG_LEVEL})")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    configure_logging(args.log_level or settings.LOG_LEVEL)
    try:
        return args.handler(args) or 0
    except Ae1SvmError as exc:
        logger.error(f"{exc.code}: {exc.message}")
        print(json.dumps(exc.to_dict()), file=sys.stderr)
        return exc.exit_code
    except Exception as exc:
        logger.exception(f"Unexpected error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
