"""
train subcommand
Resolves the run configuration, trains, and saves the model with its report
"""

import argparse
import json
from typing import Dict

from src.config import load_run_config
from src.services.pipeline_service import pipeline_service
from src.utils.validators import parse_override

# flag name -> config key
FLAG_KEYS = {
    "dataset": "dataset",
    "generator": "generator",
    "preset": "preset",
    "epochs": "epochs",
    "seed": "seed",
    "mode": "mode",
    "out_dir": "out_dir",
}


def add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("config", nargs="?", default=None, help="Flat KEY=value config file")
    parser.add_argument("--dataset", help="CSV dataset path")
    parser.add_argument("--generator", help="Synthetic generator name")
    parser.add_argument("--preset", help="Named dataset preset")
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--mode", choices=["joint", "two-stage", "raw"])
    parser.add_argument("--out-dir", dest="out_dir")
    parser.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
        help="Override any config key (repeatable); wins over the file and other flags",
    )


def collect_overrides(args: argparse.Namespace) -> Dict[str, str]:
    overrides: Dict[str, object] = {}
    for flag, key in FLAG_KEYS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    for item in args.overrides:
        key, value = parse_override(item)
        overrides[key] = value
    return overrides


def register(subparsers) -> None:
    parser = subparsers.add_parser("train", help="Train a model from a run configuration")
    add_config_arguments(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    cfg = load_run_config(args.config, collect_overrides(args))
    outcome = pipeline_service.train(cfg)
    objectives = outcome.report.epoch_objectives
    print(json.dumps({
        "model": str(outcome.model_path),
        "test_split": str(outcome.test_path),
        "mode": outcome.report.mode.value,
        "epochs": len(objectives),
        "first_objective": objectives[0] if objectives else None,
        "final_objective": objectives[-1] if objectives else None,
        "train_seconds": outcome.report.train_seconds,
    }, indent=2))
    return 0
