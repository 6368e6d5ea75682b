"""
explain subcommand
Per-row margin gradients, feature rankings and, for image rows, gradient maps
"""

import argparse

from src.services.pipeline_service import pipeline_service
from src.utils.validators import parse_indices, parse_shape


def register(subparsers) -> None:
    parser = subparsers.add_parser("explain", help="Explain decisions with input gradients")
    parser.add_argument("model", help="Model file")
    parser.add_argument("data", help="CSV holding the rows to explain")
    parser.add_argument("--rows", default="", help="Row indices, e.g. 0,4,10-12")
    parser.add_argument("--all-anomalies", action="store_true",
                        help="Also explain every row the model flags as anomalous")
    parser.add_argument("--shape", default=None, help="Image shape HEIGHTxWIDTH for gradient maps")
    parser.add_argument("--top-k", type=int, default=None)
    parser.add_argument("--label-column", default=None,
                        help="Label column to drop, if it differs from the one stored in the model")
    parser.add_argument("--out-dir", required=True)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    shape = parse_shape(args.shape) if args.shape else None
    results = pipeline_service.explain(
        args.model,
        args.data,
        parse_indices(args.rows),
        args.out_dir,
        shape=shape,
        all_anomalies=args.all_anomalies,
        top_k=args.top_k,
        label_column=args.label_column,
    )
    print(f"{len(results)} row(s) explained -> {args.out_dir}")
    return 0
