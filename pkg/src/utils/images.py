# src/utils/images.py
"""Gradient grids as CSV and 8-bit PGM images."""

from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image


def to_uint8(grid: np.ndarray) -> np.ndarray:
    """Min-max scale a grid to 0..255; a constant grid maps to 0"""
    grid = np.asarray(grid, dtype=np.float64)
    low, high = float(grid.min()), float(grid.max())
    if high == low:
        return np.zeros(grid.shape, dtype=np.uint8)
    return np.rint((grid - low) / (high - low) * 255.0).astype(np.uint8)


def write_pgm(grid: np.ndarray, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(to_uint8(grid)).save(path, format="PPM")
    return path


def write_grid_csv(grid: np.ndarray, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.asarray(grid, dtype=np.float64), delimiter=",", fmt="%.17g")
    return path
