"""
benchmark subcommand
Repeated runs of several training modes on one split, averaged
"""

import argparse
import json

from src.cli.commands.train import add_config_arguments, collect_overrides
from src.config import load_run_config
from src.services.pipeline_service import pipeline_service


def register(subparsers) -> None:
    parser = subparsers.add_parser("benchmark", help="Compare joint, two-stage and raw-input training")
    add_config_arguments(parser)
    parser.add_argument("--runs", type=int, default=5)
    parser.add_argument("--modes", default="joint,two-stage,raw",
                        help="Comma-separated subset of joint, two-stage, raw")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    overrides = collect_overrides(args)
    overrides.pop("mode", None)
    cfg = load_run_config(args.config, overrides)
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    summary = pipeline_service.benchmark(cfg, args.runs, modes)
    print(json.dumps(summary, indent=2))
    return 0
