"""
generate subcommand
Writes a synthetic dataset as CSV with a label column
"""

import argparse

from src.config import settings
from src.services.pipeline_service import pipeline_service
from src.utils.datasets import GENERATORS


def register(subparsers) -> None:
    parser = subparsers.add_parser("generate", help="Write a synthetic dataset to CSV")
    parser.add_argument("generator", choices=sorted(GENERATORS))
    parser.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    parser.add_argument("--out", required=True, help="Destination CSV path")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    dataset, path = pipeline_service.generate(args.generator, args.seed, args.out)
    columns = dataset.n_features + (1 if dataset.has_labels else 0)
    print(f"{dataset.n_rows} rows x {columns} columns -> {path}")
    return 0
