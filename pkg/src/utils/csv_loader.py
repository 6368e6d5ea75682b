# src/utils/csv_loader.py
"""
CSV ingestion and emission
Comma-delimited files with a header row; an optional label column holds the
ground truth and categorical columns are one-hot encoded.
"""

from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from src.errors import (
    CellParseError,
    DataError,
    DataFileNotFoundError,
    EmptyDataError,
    LabelValueError,
    MetricError,
)
from src.utils.datasets import ANOMALY, NORMAL, LabeledDataset
from src.utils.validators import CsvSchema

FLOAT_FORMAT = "%.17g"


def _read_raw(path: Path) -> pd.DataFrame:
    if not path.is_file():
        raise DataFileNotFoundError(f"Dataset file not found: {path}", {"path": str(path)})
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise EmptyDataError(f"Dataset file is empty: {path}", {"path": str(path)})
    except pd.errors.ParserError as e:
        raise DataError(f"Malformed CSV {path}: {e}", {"path": str(path)})
    if frame.shape[0] == 0:
        raise EmptyDataError(f"Dataset file has a header but no rows: {path}", {"path": str(path)})
    return frame


def _parse_numeric(series: pd.Series, column: str, path: Path) -> np.ndarray:
    try:
        values = series.str.strip().to_numpy(dtype=np.float64)
    except ValueError:
        values = None
    if values is None or not np.all(np.isfinite(values)):
        for row, cell in enumerate(series, start=1):
            try:
                value = float(cell)
            except ValueError:
                raise CellParseError(row, column, cell, str(path))
            if not np.isfinite(value):
                raise CellParseError(row, column, cell, str(path))
        values = series.astype(np.float64).to_numpy()
    return values


def _parse_labels(series: pd.Series, schema: CsvSchema) -> np.ndarray:
    known = schema.positive_label_values + schema.negative_label_values
    labels = np.empty(series.shape[0], dtype=np.int64)
    for row, cell in enumerate(series.str.strip(), start=1):
        if cell in schema.positive_label_values:
            labels[row - 1] = NORMAL
        elif cell in schema.negative_label_values:
            labels[row - 1] = ANOMALY
        else:
            raise LabelValueError(row, cell, known)
    return labels


def _one_hot(
    series: pd.Series, column: str, categories: Optional[List[str]] = None
) -> Tuple[List[str], List[np.ndarray]]:
    """Indicator columns; with fixed ``categories`` unseen values get all zeros"""
    values = series.str.strip()
    if categories is None:
        categories = sorted(values.unique())
    else:
        unseen = sorted(set(values.unique()) - set(categories))
        if unseen:
            logger.warning(f"Unseen categories in {column!r} encode as all zeros: {unseen[:10]}")
    names = [f"{column}={category}" for category in categories]
    columns = [(values == category).to_numpy(dtype=np.float64) for category in categories]
    return names, columns


def _encoded_columns(frame: pd.DataFrame, column: str, schema: CsvSchema) -> bool:
    """True when ``column`` is already present as its indicator columns"""
    categories = schema.categories.get(column)
    return bool(categories) and all(f"{column}={c}" in frame.columns for c in categories)


def load_csv(
    path: Union[str, Path], schema: Optional[CsvSchema] = None, read_labels: bool = True
) -> LabeledDataset:
    """
    Read a dataset file

    Numeric columns become float64; categorical columns are replaced in place by
    one indicator column per category (the schema's categories when it has
    them, else the sorted values found); the label column is mapped to +1/-1
    and removed from the features. With ``read_labels=False`` the label column
    is dropped unread. A categorical column may also arrive already encoded as
    the indicator columns :func:`save_csv` writes.
    """
    path = Path(path)
    schema = schema or CsvSchema()
    frame = _read_raw(path)

    missing = [
        c for c in schema.categorical_columns
        if c not in frame.columns and not _encoded_columns(frame, c, schema)
    ]
    if missing:
        raise DataError(f"Categorical columns not in {path}: {missing}", {"missing": missing})

    labels = None
    if schema.label_column and schema.label_column in frame.columns:
        label_series = frame.pop(schema.label_column)
        if read_labels:
            labels = _parse_labels(label_series, schema)
    elif schema.label_column and read_labels:
        logger.info(f"No {schema.label_column!r} column in {path.name}; loading without labels")

    if frame.shape[1] == 0:
        raise EmptyDataError(f"No feature columns in {path}", {"path": str(path)})

    names: List[str] = []
    columns: List[np.ndarray] = []
    categorical = set(schema.categorical_columns)
    for column in frame.columns:
        if column in categorical:
            hot_names, hot_columns = _one_hot(frame[column], column, schema.categories.get(column))
            names.extend(hot_names)
            columns.extend(hot_columns)
        else:
            names.append(str(column))
            columns.append(_parse_numeric(frame[column], str(column), path))

    features = np.column_stack(columns)
    constant = [name for name, col in zip(names, columns) if col.size > 1 and np.all(col == col[0])]
    if constant:
        logger.warning(f"Constant columns in {path.name}: {constant}")
    logger.info(
        f"Loaded {features.shape[0]} rows x {features.shape[1]} features from {path.name}"
        + (f" ({int(np.sum(labels == ANOMALY))} anomalies)" if labels is not None else "")
    )
    return LabeledDataset(features=features, labels=labels, feature_names=names)


def save_csv(dataset: LabeledDataset, path: Union[str, Path], schema: Optional[CsvSchema] = None) -> Path:
    """
    Write features and, when labels exist, the schema's label column

    Labels are written as the first normal and anomaly values of the schema,
    so the default schema gives a ``label`` column in {1, -1}.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    schema = schema or CsvSchema()
    frame = pd.DataFrame(dataset.features, columns=dataset.feature_names)
    if dataset.labels is not None:
        normal = (schema.positive_label_values or ["1"])[0]
        anomaly = (schema.negative_label_values or ["-1"])[0]
        frame[schema.label_column or "label"] = np.where(dataset.labels == NORMAL, normal, anomaly)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def load_labels(path: Union[str, Path], schema: Optional[CsvSchema] = None) -> np.ndarray:
    """The label column alone, mapped to +1/-1; feature columns are not parsed"""
    path = Path(path)
    schema = schema or CsvSchema()
    frame = _read_raw(path)
    if not schema.label_column or schema.label_column not in frame.columns:
        raise MetricError(
            f"No {schema.label_column!r} column in {path}; labels are required",
            {"path": str(path), "label_column": schema.label_column},
        )
    return _parse_labels(frame[schema.label_column], schema)


def with_categories(schema: CsvSchema, dataset: LabeledDataset) -> CsvSchema:
    """``schema`` with the category list each categorical column was encoded with"""
    categories = {}
    for column in schema.categorical_columns:
        prefix = f"{column}="
        categories[column] = [n[len(prefix):] for n in dataset.feature_names if n.startswith(prefix)]
    return schema.model_copy(update={"categories": categories})
