"""Input-validation helpers shared across the package."""

from __future__ import annotations

import numpy as np


def check_texts(texts) -> list[str]:
    """Materialize an iterable of documents, rejecting non-string entries."""
    out = list(texts)
    for i, text in enumerate(out):
        if not isinstance(text, str):
            raise TypeError(f"document {i} is {type(text).__name__}, expected str")
    return out


def check_class_labels(labels, c: int) -> np.ndarray:
    """Validate a vector of 1-based class labels against a class count."""
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise ValueError("class labels must be one-dimensional")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        raise ValueError(f"class labels must be integers, got dtype {arr.dtype}")
    arr = arr.astype(np.int64)
    if arr.size and (arr.min() < 1 or arr.max() > c):
        raise ValueError(f"class labels must lie in 1..{c}")
    return arr


def check_square_matrix(values, name: str = "matrix") -> np.ndarray:
    """Coerce to a float64 square 2-D array."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    return arr


def classes_by_first_appearance(y) -> tuple[np.ndarray, np.ndarray]:
    """Map arbitrary labels to dense 1-based indices in first-appearance order.

    Returns the class inventory and the encoded label vector.
    """
    values = np.asarray(y)
    if values.ndim != 1:
        raise ValueError("labels must be one-dimensional")
    seen: dict = {}
    for value in values.tolist():
        if value not in seen:
            seen[value] = len(seen) + 1
    classes = np.asarray(list(seen))
    encoded = np.fromiter(
        (seen[value] for value in values.tolist()), dtype=np.int64, count=values.size
    )
    return classes, encoded
