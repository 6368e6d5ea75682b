"""score subcommand"""

import argparse

from src.services.pipeline_service import pipeline_service


def register(subparsers) -> None:
    parser = subparsers.add_parser("score", help="Score every row of a CSV with a trained model")
    parser.add_argument("model", help="Model file")
    parser.add_argument("data", help="CSV to score")
    parser.add_argument("--out", required=True, help="Scores CSV (row_index, score, decision)")
    parser.add_argument("--label-column", default=None,
                        help="Label column to drop, if it differs from the one stored in the model")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    frame = pipeline_service.score(
        args.model, args.data, args.out, label_column=args.label_column
    )
    print(f"{frame.shape[0]} rows scored -> {args.out}")
    return 0
