"""CSV datasets laid out as ``<root>/<name>/Train.csv`` and ``Test.csv``.

The last column is the target. A single header row is allowed and detected
by the presence of any non-numeric cell in the first row.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import MissingFile, NonNumericCell, RaggedRows

DATASETS_DIR = Path(__file__).resolve().parent.parent / "datasets"


@dataclass(frozen=True)
class Dataset:
    name: str
    train_x: np.ndarray
    train_y: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray

    @property
    def n_vars(self) -> int:
        return self.train_x.shape[1]


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_csv(path) -> tuple[np.ndarray, np.ndarray]:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"no such dataset file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [(n, row) for n, row in enumerate(csv.reader(fh), start=1)
                if any(cell.strip() for cell in row)]
    if rows and not all(_is_number(c) for c in rows[0][1]):
        rows = rows[1:]
    if not rows:
        raise RaggedRows(f"{path}: no data rows")
    width = len(rows[0][1])
    if width < 2:
        raise RaggedRows(f"{path}: need at least one input column and a target")
    data = np.empty((len(rows), width))
    for r, (line, row) in enumerate(rows):
        if len(row) != width:
            raise RaggedRows(f"{path}:{line}: expected {width} cells, found {len(row)}")
        for c, cell in enumerate(row):
            try:
                data[r, c] = float(cell)
            except ValueError:
                raise NonNumericCell(f"{path}:{line}: column {c + 1}: {cell!r}") from None
    if not np.all(np.isfinite(data)):
        raise NonNumericCell(f"{path}: missing or non-finite values")
    return data[:, :-1], data[:, -1]


def load_dataset(name, root=None) -> Dataset:
    """Load a dataset by name (a folder under ``root``) or by directory path."""
    folder = Path(name)
    if not (folder / "Train.csv").exists():
        folder = Path(root or DATASETS_DIR) / str(name)
    train_x, train_y = read_csv(folder / "Train.csv")
    test_x, test_y = read_csv(folder / "Test.csv")
    if train_x.shape[1] != test_x.shape[1]:
        raise RaggedRows(
            f"{folder}: Train.csv has {train_x.shape[1] + 1} columns, "
            f"Test.csv has {test_x.shape[1] + 1}"
        )
    return Dataset(Path(folder).name, train_x, train_y, test_x, test_y)
