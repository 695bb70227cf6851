"""Input validation helpers shared by the numeric modules."""
from __future__ import annotations

import numpy as np

from .errors import ShapeMismatch, TargetOutOfRange


def check_matrix(x, dim: int | None = None, dtype=None) -> np.ndarray:
    """Coerce to a 2-D float array, optionally enforcing the column count."""
    x = np.asarray(x, dtype if dtype is not None else np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D matrix, got ndim={x.ndim}")
    if dim is not None and x.shape[1] != dim:
        raise ShapeMismatch(f"expected {dim} columns, got {x.shape[1]}")
    return x


def check_targets(y, n_heads: int, n_classes: int) -> np.ndarray:
    """Coerce to (N, n_heads) int64 class ids and range-check them."""
    y = np.asarray(y, np.int64)
    if y.ndim == 1:
        y = y[:, None]
    if y.ndim != 2 or y.shape[1] != n_heads:
        raise ShapeMismatch(
            f"expected targets of shape (N, {n_heads}), got {y.shape}"
        )
    if y.size and (y.min() < 0 or y.max() >= n_classes):
        raise TargetOutOfRange(
            f"target ids must lie in [0, {n_classes}), got range "
            f"[{y.min()}, {y.max()}]"
        )
    return y
