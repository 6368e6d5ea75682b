"""
Datasets
Labeled sample matrices, the synthetic generators and the evaluation split
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from src.errors import ArgumentError, DataError
from src.utils.seeding import Stream, stream_rng

NORMAL = 1
ANOMALY = -1

GAUSSIAN_DIM = 512
GAUSSIAN_NORMALS = 950
GAUSSIAN_ANOMALIES = 50
GAUSSIAN_ANOMALY_STD = 5.0

ILLUSTRATIVE_NORMALS = 1950
ILLUSTRATIVE_ANOMALIES = 50
CIRCLE_CENTER = (0.5, 0.5)
CIRCLE_RADIUS = 0.35
ANOMALY_DISTANCE_FACTOR = 1.5


@dataclass
class LabeledDataset:
    """Row-major samples; labels (+1 normal, -1 anomaly) are for evaluation only"""

    features: np.ndarray
    labels: Optional[np.ndarray] = None
    feature_names: Optional[List[str]] = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise DataError(f"Features must be a matrix, got shape {self.features.shape}")
        if not np.all(np.isfinite(self.features)):
            raise DataError("Features contain NaN or infinite values")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.features.shape[0],):
                raise DataError(
                    f"{self.labels.shape[0]} labels for {self.features.shape[0]} rows"
                )
            if not np.all(np.isin(self.labels, (NORMAL, ANOMALY))):
                raise DataError("Labels must be +1 (normal) or -1 (anomaly)")
        if self.feature_names is None:
            self.feature_names = [f"x{i + 1}" for i in range(self.features.shape[1])]
        elif len(self.feature_names) != self.features.shape[1]:
            raise DataError(
                f"{len(self.feature_names)} feature names for {self.features.shape[1]} columns"
            )

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    def subset(self, indices: np.ndarray) -> "LabeledDataset":
        return LabeledDataset(
            features=self.features[indices],
            labels=None if self.labels is None else self.labels[indices],
            feature_names=list(self.feature_names),
        )

    def anomaly_count(self) -> int:
        return 0 if self.labels is None else int(np.sum(self.labels == ANOMALY))


def _shuffled(features: np.ndarray, labels: np.ndarray, rng: np.random.Generator) -> LabeledDataset:
    order = rng.permutation(features.shape[0])
    return LabeledDataset(features=features[order], labels=labels[order])


def gen_gaussian(seed: int) -> LabeledDataset:
    """950 rows from N(0, 1) and 50 rows from N(0, 5^2) in 512 dimensions"""
    rng = stream_rng(seed, Stream.GENERATOR)
    normals = rng.normal(0.0, 1.0, size=(GAUSSIAN_NORMALS, GAUSSIAN_DIM))
    anomalies = rng.normal(0.0, GAUSSIAN_ANOMALY_STD, size=(GAUSSIAN_ANOMALIES, GAUSSIAN_DIM))
    features = np.vstack([normals, anomalies])
    labels = np.concatenate([
        np.full(GAUSSIAN_NORMALS, NORMAL), np.full(GAUSSIAN_ANOMALIES, ANOMALY)
    ])
    return _shuffled(features, labels, rng)


def gen_illustrative_4d(seed: int, radius: float = CIRCLE_RADIUS) -> LabeledDataset:
    """
    Four-dimensional toy set for checking attributions

    Normals: dims 1-2 uniform inside the circle around (0.5, 0.5), dims 3-4
    uniform on [-0.2, 0.2]. Anomalies: dims 1-2 uniform on [-0.5, 1.5]^2 kept
    only beyond 1.5 radii from the center, dims 3-4 uniform on [-2, 2].
    """
    rng = stream_rng(seed, Stream.GENERATOR)
    center = np.asarray(CIRCLE_CENTER)

    # uniform in the disc: sqrt of a uniform radius fraction
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, ILLUSTRATIVE_NORMALS))
    theta = rng.uniform(0.0, 2.0 * np.pi, ILLUSTRATIVE_NORMALS)
    disc = center + np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    normals = np.column_stack([disc, rng.uniform(-0.2, 0.2, size=(ILLUSTRATIVE_NORMALS, 2))])

    outside: List[np.ndarray] = []
    while len(outside) < ILLUSTRATIVE_ANOMALIES:
        point = rng.uniform(-0.5, 1.5, size=2)
        if np.linalg.norm(point - center) > ANOMALY_DISTANCE_FACTOR * radius:
            outside.append(point)
    anomalies = np.column_stack([
        np.asarray(outside), rng.uniform(-2.0, 2.0, size=(ILLUSTRATIVE_ANOMALIES, 2))
    ])

    features = np.vstack([normals, anomalies])
    labels = np.concatenate([
        np.full(ILLUSTRATIVE_NORMALS, NORMAL), np.full(ILLUSTRATIVE_ANOMALIES, ANOMALY)
    ])
    return _shuffled(features, labels, rng)


GENERATORS = {
    "gaussian": gen_gaussian,
    "illustrative4d": gen_illustrative_4d,
}


def generate(name: str, seed: int) -> LabeledDataset:
    if name not in GENERATORS:
        raise ArgumentError(
            f"Unknown generator {name!r}", {"supported": sorted(GENERATORS)}
        )
    return GENERATORS[name](seed)


def split(data: LabeledDataset, ratio: float, seed: int) -> Tuple[LabeledDataset, LabeledDataset]:
    """
    Partition rows into (train, test) with ``ratio`` of each class in train

    Stratified by label when labels exist; a class with at least two rows
    keeps at least one row on each side. Row order inside each half follows
    the original order.
    """
    if not 0.0 < ratio < 1.0:
        raise ArgumentError(f"Split ratio must lie strictly between 0 and 1, got {ratio}")
    rng = stream_rng(seed, Stream.SPLIT)

    if data.labels is None:
        groups = [np.arange(data.n_rows)]
    else:
        groups = [np.flatnonzero(data.labels == label) for label in (NORMAL, ANOMALY)]

    train_parts = []
    for group in groups:
        if group.size == 0:
            continue
        permuted = rng.permutation(group)
        n_train = int(round(ratio * group.size))
        if group.size >= 2:
            # both halves keep at least one row of every class that has two
            n_train = min(max(n_train, 1), group.size - 1)
        train_parts.append(permuted[:n_train])

    train_idx = np.sort(np.concatenate(train_parts)) if train_parts else np.array([], dtype=int)
    mask = np.zeros(data.n_rows, dtype=bool)
    mask[train_idx] = True
    return data.subset(np.flatnonzero(mask)), data.subset(np.flatnonzero(~mask))
