"""
Evaluation Service
ROC / precision-recall curves, AUROC, AUPRC and decision-score histograms.
Anomalies are the positive class; a sample's anomaly score is minus its
decision score.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel
from scipy.stats import rankdata

from src.errors import ArgumentError, MetricError
from src.utils.datasets import ANOMALY, NORMAL


@dataclass
class ScoredSet:
    """Decision scores (higher = more normal) with +1/-1 ground truth"""

    scores: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64).ravel()
        self.labels = np.asarray(self.labels, dtype=np.int64).ravel()
        if self.scores.shape != self.labels.shape:
            raise MetricError(f"{self.scores.shape[0]} scores for {self.labels.shape[0]} labels")
        if not np.all(np.isin(self.labels, (NORMAL, ANOMALY))):
            raise MetricError("Labels must be +1 (normal) or -1 (anomaly)")

    @property
    def n_anomalies(self) -> int:
        return int(np.sum(self.labels == ANOMALY))

    @property
    def n_normals(self) -> int:
        return int(np.sum(self.labels == NORMAL))

    def require_both_classes(self) -> None:
        if self.n_anomalies == 0 or self.n_normals == 0:
            raise MetricError(
                "Curve metrics need both classes",
                {"anomalies": self.n_anomalies, "normals": self.n_normals},
            )


@dataclass
class Histogram:
    edges: np.ndarray
    count_normal: np.ndarray
    count_anomaly: np.ndarray


class MetricsReport(BaseModel):
    auroc: float
    auprc: float
    n_train: Optional[int] = None
    n_test: int
    train_seconds: Optional[float] = None
    score_seconds: Optional[float] = None


def _threshold_counts(s: ScoredSet) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cumulative (tp, fp) at each distinct anomaly-score threshold, descending"""
    anomaly_score = -s.scores
    order = np.argsort(-anomaly_score, kind="mergesort")
    sorted_scores = anomaly_score[order]
    is_anomaly = (s.labels[order] == ANOMALY).astype(np.int64)
    # last position of every run of tied scores
    distinct = np.flatnonzero(np.diff(sorted_scores)) if sorted_scores.size > 1 else np.array([], dtype=int)
    ends = np.append(distinct, sorted_scores.size - 1)
    tp = np.cumsum(is_anomaly)[ends]
    fp = (ends + 1) - tp
    return sorted_scores[ends], tp, fp


def roc_curve(s: ScoredSet) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(thresholds, tpr, fpr), starting from the (0, 0) corner"""
    s.require_both_classes()
    thresholds, tp, fp = _threshold_counts(s)
    tpr = np.concatenate([[0.0], tp / s.n_anomalies])
    fpr = np.concatenate([[0.0], fp / s.n_normals])
    return np.concatenate([[np.inf], thresholds]), tpr, fpr


def precision_recall_curve(s: ScoredSet) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(thresholds, recall, precision) over descending anomaly-score thresholds"""
    s.require_both_classes()
    thresholds, tp, fp = _threshold_counts(s)
    return thresholds, tp / s.n_anomalies, tp / (tp + fp)


def auroc(s: ScoredSet) -> float:
    """P(anomaly ranked above normal) + 0.5 P(tie), from average ranks"""
    s.require_both_classes()
    ranks = rankdata(-s.scores)  # ascending in anomaly score
    n_pos, n_neg = s.n_anomalies, s.n_normals
    rank_sum = float(np.sum(ranks[s.labels == ANOMALY]))
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def auroc_trapezoid(s: ScoredSet) -> float:
    """Trapezoidal area under :func:`roc_curve`"""
    _, tpr, fpr = roc_curve(s)
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))


def auprc(s: ScoredSet) -> float:
    """Average precision: sum over thresholds of (R_i - R_{i-1}) * P_i"""
    _, recall, precision = precision_recall_curve(s)
    return float(np.sum(np.diff(np.concatenate([[0.0], recall])) * precision))


def histogram(s: ScoredSet, bins: int) -> Histogram:
    """Per-class counts over shared equal-width bins spanning all scores"""
    if bins < 1:
        raise ArgumentError(f"bins must be at least 1, got {bins}")
    if s.scores.size == 0:
        raise MetricError("No scores to histogram")
    low, high = float(s.scores.min()), float(s.scores.max())
    if low == high:
        low, high = low - 0.5, high + 0.5
    edges = np.linspace(low, high, bins + 1)
    count_normal, _ = np.histogram(s.scores[s.labels == NORMAL], bins=edges)
    count_anomaly, _ = np.histogram(s.scores[s.labels == ANOMALY], bins=edges)
    return Histogram(edges=edges, count_normal=count_normal, count_anomaly=count_anomaly)


class EvaluationService:
    """Computes and writes the metric bundle for a scored test set"""

    def evaluate(
        self,
        scored: ScoredSet,
        n_train: Optional[int] = None,
        train_seconds: Optional[float] = None,
        score_seconds: Optional[float] = None,
    ) -> MetricsReport:
        report = MetricsReport(
            auroc=auroc(scored),
            auprc=auprc(scored),
            n_train=n_train,
            n_test=int(scored.scores.size),
            train_seconds=train_seconds,
            score_seconds=score_seconds,
        )
        logger.info(f"AUROC={report.auroc:.4f} AUPRC={report.auprc:.4f} on {report.n_test} rows")
        return report

    def write_outputs(self, scored: ScoredSet, report: MetricsReport, out_dir: Path, bins: int) -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

        thresholds, tpr, fpr = roc_curve(scored)
        pd.DataFrame({"threshold": thresholds, "tpr": tpr, "fpr": fpr}).to_csv(
            out_dir / "roc.csv", index=False, float_format="%.17g", lineterminator="\n")

        thresholds, recall, precision = precision_recall_curve(scored)
        pd.DataFrame({"threshold": thresholds, "recall": recall, "precision": precision}).to_csv(
            out_dir / "pr.csv", index=False, float_format="%.17g", lineterminator="\n")

        hist = histogram(scored, bins)
        pd.DataFrame({
            "bin_left": hist.edges[:-1],
            "bin_right": hist.edges[1:],
            "count_normal": hist.count_normal,
            "count_anomaly": hist.count_anomaly,
        }).to_csv(out_dir / "histogram.csv", index=False, float_format="%.17g", lineterminator="\n")

        metrics_path = out_dir / "metrics.json"
        metrics_path.write_text(report.model_dump_json(indent=2), encoding="utf-8")
        logger.info(f"Metrics written to {metrics_path}")
        return metrics_path


# Global evaluation service instance
evaluation_service = EvaluationService()
