"""
Pipeline Service
Coordinates data loading, splitting, training, scoring, explanation and
evaluation for the command line
"""

import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from src.config import RunConfig, settings, write_effective_config
from src.errors import ArgumentError, DataError, MetricError, WidthMismatchError
from src.models.ae1svm import Ae1SvmModel, TrainReport, fit
from src.models.ocsvm import ANOMALY, decisions
from src.services.attribution_service import (
    AttributionResult,
    attribution_service,
    gradient_map,
    rank_features,
)
from src.services.evaluation_service import MetricsReport, ScoredSet, evaluation_service
from src.utils.csv_loader import FLOAT_FORMAT, load_csv, load_labels, save_csv, with_categories
from src.utils.datasets import LabeledDataset, generate, split
from src.utils.images import write_grid_csv, write_pgm
from src.utils.serialization import load_model, save_model
from src.utils.validators import CsvSchema, validate_indices

MODEL_FILE = "model.npz"
TRAIN_REPORT_FILE = "train_report.json"
EFFECTIVE_CONFIG_FILE = "effective_config.env"


@dataclass
class TrainOutcome:
    model: Ae1SvmModel
    report: TrainReport
    model_path: Path
    train_path: Path
    test_path: Path
    test: LabeledDataset


def _write_json(payload, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def build_model(cfg: RunConfig, input_dim: int, seed: Optional[int] = None) -> Ae1SvmModel:
    return Ae1SvmModel.build(
        input_dim=input_dim,
        encoder_layers=cfg.encoder_layers,
        nu=cfg.nu,
        alpha=cfg.alpha,
        sigma=cfg.sigma,
        rff_features=cfg.rff_features,
        seed=cfg.seed if seed is None else seed,
        activation=cfg.activation,
    )


def schema_from_config(cfg: RunConfig) -> CsvSchema:
    return CsvSchema(
        label_column=cfg.label_column,
        positive_label_values=cfg.positive_label_values,
        negative_label_values=cfg.negative_label_values,
        categorical_columns=cfg.categorical_columns,
    )


class PipelineService:
    """End-to-end workflows behind each subcommand"""

    def generate(self, generator_name: str, seed: int, out_path: Path) -> Tuple[LabeledDataset, Path]:
        dataset = generate(generator_name, seed)
        try:
            path = save_csv(dataset, out_path)
        except OSError as e:
            raise ArgumentError(f"Cannot write {out_path}: {e}", {"path": str(out_path)})
        logger.info(
            f"Generated {generator_name}: {dataset.n_rows} rows x {dataset.n_features} features "
            f"({dataset.anomaly_count()} anomalies) -> {path}"
        )
        return dataset, path

    def load_dataset(self, cfg: RunConfig) -> LabeledDataset:
        if cfg.generator:
            return generate(cfg.generator, cfg.seed)
        return load_csv(cfg.dataset, schema_from_config(cfg))

    def train(self, cfg: RunConfig) -> TrainOutcome:
        out_dir = Path(cfg.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

        logger.info("Step 1: Loading dataset...")
        data = self.load_dataset(cfg)
        schema = with_categories(schema_from_config(cfg), data)
        if data.has_labels and not schema.label_column:
            schema = schema.model_copy(update={"label_column": "label"})

        logger.info(f"Step 2: Splitting {data.n_rows} rows with ratio {cfg.split_ratio}...")
        train, test = split(data, cfg.split_ratio, cfg.seed)
        train_path = save_csv(train, out_dir / "train.csv", schema)
        test_path = save_csv(test, out_dir / "test.csv", schema)

        logger.info("Step 3: Building and training the model...")
        model = build_model(cfg, data.n_features)
        model.schema = schema
        report = fit(model, train, cfg.train_config())

        logger.info("Step 4: Saving model, report and effective config...")
        model_path = save_model(model, out_dir / MODEL_FILE)
        _write_json(report.model_dump(mode="json"), out_dir / TRAIN_REPORT_FILE)
        write_effective_config(cfg, out_dir / EFFECTIVE_CONFIG_FILE)

        return TrainOutcome(model, report, model_path, train_path, test_path, test)

    def _load_for_model(self, model: Ae1SvmModel, data_path: Path,
                        label_column: Optional[str] = None) -> LabeledDataset:
        """Read ``data_path`` the way the model's training data was read; labels are dropped unread"""
        schema = model.schema or CsvSchema()
        if label_column:
            schema = schema.model_copy(update={"label_column": label_column})
        data = load_csv(data_path, schema, read_labels=False)
        if data.n_features != model.input_dim:
            raise WidthMismatchError(model.input_dim, data.n_features)
        return data

    def score_dataset(self, model: Ae1SvmModel, data: LabeledDataset) -> Tuple[pd.DataFrame, float]:
        started = time.perf_counter()
        scores = model.score(data.features)
        elapsed = time.perf_counter() - started
        frame = pd.DataFrame({
            "row_index": np.arange(data.n_rows),
            "score": scores,
            "decision": decisions(scores),
        })
        return frame, elapsed

    def score(self, model_path: Path, data_path: Path, out_path: Path,
              label_column: Optional[str] = None) -> pd.DataFrame:
        model = load_model(model_path)
        data = self._load_for_model(model, Path(data_path), label_column)
        frame, elapsed = self.score_dataset(model, data)

        out_path = Path(out_path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(out_path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        _write_json({"n_test": data.n_rows, "score_seconds": elapsed},
                    out_path.with_suffix(".meta.json"))
        logger.info(
            f"Scored {data.n_rows} rows in {elapsed:.3f}s: "
            f"{int(np.sum(frame['decision'] == ANOMALY))} flagged as anomalies -> {out_path}"
        )
        return frame

    def explain(
        self,
        model_path: Path,
        data_path: Path,
        row_indices: Sequence[int],
        out_dir: Path,
        shape: Optional[Tuple[int, int]] = None,
        all_anomalies: bool = False,
        top_k: Optional[int] = None,
        label_column: Optional[str] = None,
    ) -> List[AttributionResult]:
        model = load_model(model_path)
        data = self._load_for_model(model, Path(data_path), label_column)
        indices = validate_indices(list(row_indices), data.n_rows)
        if all_anomalies:
            flagged = np.flatnonzero(model.decide(data.features) == ANOMALY).tolist()
            indices = sorted(set(indices) | set(flagged))
        if not indices:
            raise ArgumentError("No rows to explain; pass --rows or --all-anomalies")
        if shape is not None and shape[0] * shape[1] != data.n_features:
            raise ArgumentError(
                f"Shape {shape[0]}x{shape[1]} does not hold {data.n_features} features",
                {"height": shape[0], "width": shape[1], "features": data.n_features},
            )

        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        results = attribution_service.explain_rows(model, data.features, indices)
        top_k = settings.GRADIENT_TOP_K if top_k is None else top_k
        rankings: Dict[str, List[Dict]] = {}

        for result in results:
            idx = result.sample_index
            pd.DataFrame({
                "feature": data.feature_names,
                "gradient": result.gradient,
                "positive": result.positive_part,
                "negative": result.negative_part,
            }).to_csv(out_dir / f"gradient_row{idx}.csv", index=False,
                      float_format=FLOAT_FORMAT, lineterminator="\n")
            rankings[str(idx)] = rank_features(result, data.feature_names, top_k)

            if shape is not None:
                maps = gradient_map(result, *shape)
                for kind, grid in maps.items():
                    write_grid_csv(grid, out_dir / f"row{idx}_{kind}.csv")
                    write_pgm(grid, out_dir / f"row{idx}_{kind}.pgm")

        _write_json(rankings, out_dir / "rankings.json")
        logger.info(f"Explained {len(results)} row(s) -> {out_dir}")
        return results

    def evaluate(
        self,
        scores_csv: Path,
        labels_path: Path,
        out_dir: Path,
        train_report: Optional[Path] = None,
        label_column: Optional[str] = None,
        bins: Optional[int] = None,
        model_path: Optional[Path] = None,
    ) -> MetricsReport:
        """Metrics for a scores CSV; labels are read with the model's schema when one is given"""
        scores_csv = Path(scores_csv)
        if not scores_csv.is_file():
            raise DataError(f"Scores file not found: {scores_csv}", {"path": str(scores_csv)})
        scores = pd.read_csv(scores_csv, float_precision="round_trip")
        if "score" not in scores.columns:
            raise DataError(f"No 'score' column in {scores_csv}")

        schema = load_model(model_path).schema if model_path is not None else None
        schema = schema or CsvSchema()
        if label_column:
            schema = schema.model_copy(update={"label_column": label_column})
        labels = load_labels(labels_path, schema)
        if labels.shape[0] != scores.shape[0]:
            raise MetricError(
                f"{scores.shape[0]} scores but {labels.shape[0]} labeled rows",
                {"scores": int(scores.shape[0]), "labels": int(labels.shape[0])},
            )
        order = scores["row_index"].to_numpy() if "row_index" in scores.columns else np.arange(scores.shape[0])
        scored = ScoredSet(scores["score"].to_numpy(), labels[order])

        n_train = train_seconds = score_seconds = None
        sidecar = scores_csv.with_suffix(".meta.json")
        if sidecar.is_file():
            score_seconds = json.loads(sidecar.read_text(encoding="utf-8")).get("score_seconds")
        if train_report is not None:
            report = TrainReport.model_validate_json(Path(train_report).read_text(encoding="utf-8"))
            n_train, train_seconds = report.n_train, report.train_seconds

        metrics = evaluation_service.evaluate(scored, n_train, train_seconds, score_seconds)
        evaluation_service.write_outputs(scored, metrics, Path(out_dir), bins or settings.HISTOGRAM_BINS)
        return metrics

    def benchmark(self, cfg: RunConfig, runs: int, modes: Sequence[str]) -> Dict:
        """
        Repeated runs on one split

        Data and split come from ``cfg.seed``; run r trains every mode with
        model seed ``cfg.seed + r``.
        """
        if runs < 1:
            raise ArgumentError(f"runs must be at least 1, got {runs}")
        unknown = [m for m in modes if m not in ("joint", "two-stage", "raw")]
        if unknown:
            raise ArgumentError(f"Unknown benchmark modes {unknown}")

        out_dir = Path(cfg.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        data = self.load_dataset(cfg)
        train, test = split(data, cfg.split_ratio, cfg.seed)
        if test.labels is None:
            raise MetricError("Benchmarking needs labeled data")

        rows = []
        for run in range(runs):
            seed = cfg.seed + run
            for mode in modes:
                run_cfg = cfg.model_copy(update={"mode": mode, "seed": seed,
                                                 "encoder_layers": [] if mode == "raw" else cfg.encoder_layers})
                model = build_model(run_cfg, data.n_features)
                report = fit(model, train, run_cfg.train_config())
                frame, elapsed = self.score_dataset(model, test)
                metrics = evaluation_service.evaluate(
                    ScoredSet(frame["score"].to_numpy(), test.labels),
                    report.n_train, report.train_seconds, elapsed,
                )
                rows.append({"mode": mode, "seed": seed, **metrics.model_dump()})
                logger.info(f"Run {run + 1}/{runs} [{mode}] AUROC={metrics.auroc:.4f} AUPRC={metrics.auprc:.4f}")

        results = pd.DataFrame(rows)
        results.to_csv(out_dir / "benchmark.csv", index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        summary = {
            mode: {
                "runs": int(group.shape[0]),
                "auroc_mean": float(group["auroc"].mean()),
                "auprc_mean": float(group["auprc"].mean()),
                "train_seconds_mean": float(group["train_seconds"].mean()),
                "score_seconds_mean": float(group["score_seconds"].mean()),
            }
            for mode, group in results.groupby("mode", sort=False)
        }
        _write_json(summary, out_dir / "benchmark_summary.json")
        write_effective_config(cfg, out_dir / EFFECTIVE_CONFIG_FILE)
        return summary


# Global pipeline service instance
pipeline_service = PipelineService()
