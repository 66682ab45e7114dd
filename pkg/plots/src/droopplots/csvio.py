"""Readers for the documented droopsim CSV and manifest schemas.

This package deliberately knows nothing about the simulator internals; the
file formats are the entire interface.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """The input file does not match the documented column schema."""


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Load a droopsim CSV: a header row plus float rows.

    Returns the header and a (possibly zero-row) float array whose second
    dimension always matches the header.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected a header row") from None
        rows = [[float(cell) for cell in row] for row in reader if row]
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(header)))
    if data.shape[1] != len(header):
        raise SchemaError(f"{path}: ragged rows, expected {len(header)} columns")
    return header, data


def column(header: list[str], data: np.ndarray, name: str,
           path: str = "") -> np.ndarray:
    try:
        return data[:, header.index(name)]
    except ValueError:
        raise SchemaError(f"{path or 'input'}: missing column {name!r}") from None


def spectrum_columns(header: list[str]) -> list[tuple[int, int]]:
    """Index pairs of the re_k/im_k eigenvalue columns of a sweep CSV."""
    pairs = []
    k = 1
    while f"re_{k}" in header and f"im_{k}" in header:
        pairs.append((header.index(f"re_{k}"), header.index(f"im_{k}")))
        k += 1
    if not pairs:
        raise SchemaError("missing column 're_1' (not an eigen-sweep CSV?)")
    return pairs


def read_manifest_events(path: str | Path) -> list[dict]:
    """Event markers from a scenario manifest; empty when absent."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return list(doc.get("events", []))
