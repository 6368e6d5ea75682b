"""eval subcommand"""

import argparse

from src.services.pipeline_service import pipeline_service


def register(subparsers) -> None:
    parser = subparsers.add_parser("eval", help="AUROC, AUPRC, curves and histogram for a scores CSV")
    parser.add_argument("scores", help="Scores CSV written by 'score'")
    parser.add_argument("labels", help="CSV with the ground-truth label column, same row order")
    parser.add_argument("--out-dir", required=True)
    parser.add_argument("--train-report", default=None, help="train_report.json for n_train/train_seconds")
    parser.add_argument("--model", default=None,
                        help="Model file whose stored schema decodes the label column")
    parser.add_argument("--label-column", default=None)
    parser.add_argument("--bins", type=int, default=None)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    metrics = pipeline_service.evaluate(
        args.scores, args.labels, args.out_dir,
        train_report=args.train_report, label_column=args.label_column, bins=args.bins,
        model_path=args.model,
    )
    print(metrics.model_dump_json(indent=2))
    return 0
