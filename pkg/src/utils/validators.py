# src/utils/validators.py

import re
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, field_validator

from src.errors import ArgumentError

# ---------- INGESTION SCHEMA ----------

class CsvSchema(BaseModel):
    """How to read a delimited dataset file"""

    model_config = ConfigDict(extra="forbid")

    label_column: Optional[str] = "label"
    positive_label_values: List[str] = ["1"]
    negative_label_values: List[str] = ["-1"]
    categorical_columns: List[str] = []
    # column -> categories in indicator order, fixed once a model is trained
    categories: Dict[str, List[str]] = {}

    @field_validator("positive_label_values", "negative_label_values")
    @classmethod
    def strip_values(cls, v: List[str]) -> List[str]:
        return [str(item).strip() for item in v]


# ---------- VALIDATION HELPERS ----------

_SHAPE_PATTERN = re.compile(r"^\s*(\d+)\s*[xX×,]\s*(\d+)\s*$")


def parse_shape(text: str) -> Tuple[int, int]:
    """'16x16' -> (16, 16)"""
    match = _SHAPE_PATTERN.match(text or "")
    if not match:
        raise ArgumentError(f"Image shape must look like HEIGHTxWIDTH, got {text!r}")
    height, width = int(match.group(1)), int(match.group(2))
    if height < 1 or width < 1:
        raise ArgumentError(f"Image shape must be positive, got {text!r}")
    return height, width


def parse_indices(text: str) -> List[int]:
    """'0,3,7-9' -> [0, 3, 7, 8, 9]"""
    indices: List[int] = []
    for part in (text or "").split(","):
        part = part.strip()
        if not part:
            continue
        if re.fullmatch(r"\d+-\d+", part):
            start, end = (int(p) for p in part.split("-"))
            if end < start:
                raise ArgumentError(f"Descending index range {part!r}")
            indices.extend(range(start, end + 1))
        elif part.isdigit():
            indices.append(int(part))
        else:
            raise ArgumentError(f"Bad row index {part!r}")
    return indices


def validate_indices(indices: Sequence[int], n_rows: int) -> List[int]:
    bad = [i for i in indices if not 0 <= i < n_rows]
    if bad:
        raise ArgumentError(
            f"Row indices out of range for {n_rows} rows: {bad[:10]}",
            {"n_rows": n_rows, "bad": bad[:10]},
        )
    return list(indices)


def parse_override(text: str) -> Tuple[str, str]:
    """'key=value' from a --set flag"""
    if "=" not in text:
        raise ArgumentError(f"Override must look like key=value, got {text!r}")
    key, value = text.split("=", 1)
    key = key.strip()
    if not key:
        raise ArgumentError(f"Override has an empty key: {text!r}")
    return key, value.strip()
