"""
Dataset CSV persistence.

Layout:
    # key=<json value>        one line per meta entry
    x1,...,x2d,y1,...,y2d      header
    <row per pair>             floats with 17 significant digits (exact round trip)
"""
import json
import logging
from io import StringIO
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from .sampling import Dataset, DatasetError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


class DatasetParseError(DatasetError):
    """Raised when a dataset file is malformed; the message names the line."""
    pass


class EmptyDatasetError(DatasetError):
    """Raised when a dataset file holds no pairs."""
    pass


def column_names(d: int) -> List[str]:
    return [f"x{i + 1}" for i in range(2 * d)] + [f"y{i + 1}" for i in range(2 * d)]


def save_dataset(dataset: Dataset, path: Path) -> Path:
    """
    Write a dataset with its meta block.

    Args:
        dataset: Dataset to write
        path: Output CSV path (parent directories are created)

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(np.hstack([dataset.x, dataset.y]), columns=column_names(dataset.d))
    with open(path, "w", encoding="utf-8", newline="") as f:
        for key, value in dataset.meta.items():
            f.write(f"# {key}={json.dumps(value)}\n")
        frame.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(dataset)} pairs to {path}")
    return path


def _parse_meta(lines: List[str]) -> Dict[str, Any]:
    meta = {}
    for lineno, line in enumerate(lines, start=1):
        body = line[1:].strip()
        key, sep, raw = body.partition("=")
        if not sep or not key:
            raise DatasetParseError(f"line {lineno}: expected '# key=value', got {line.rstrip()!r}")
        try:
            meta[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            meta[key.strip()] = raw.strip()
    return meta


def parse_dataset(text: str) -> Dataset:
    """
    Parse dataset CSV text.

    Raises:
        EmptyDatasetError: no header or no data rows
        DatasetParseError: wrong column count or non-numeric field, naming the line
    """
    lines = text.splitlines()
    n_meta = 0
    while n_meta < len(lines) and lines[n_meta].startswith("#"):
        n_meta += 1
    meta = _parse_meta(lines[:n_meta])
    body = lines[n_meta:]
    if not body or not body[0].strip():
        raise EmptyDatasetError("Dataset file has no header or rows")

    header = [c.strip() for c in body[0].split(",")]
    header_line = n_meta + 1
    if len(header) % 4 or header != column_names(len(header) // 4):
        raise DatasetParseError(f"line {header_line}: unexpected header {body[0]!r}")
    d = len(header) // 4

    rows = body[1:]
    while rows and not rows[-1].strip():
        rows.pop()
    if not rows:
        raise EmptyDatasetError("Dataset file has a header but no rows")
    for offset, row in enumerate(rows):
        n_fields = len(row.split(","))
        if n_fields != 4 * d:
            raise DatasetParseError(
                f"line {header_line + 1 + offset}: expected {4 * d} columns, got {n_fields}"
            )

    frame = pd.read_csv(StringIO("\n".join([body[0], *rows])), dtype=str, keep_default_na=False)
    values = frame.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=np.float64)
    bad = ~np.isfinite(values)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise DatasetParseError(
            f"line {header_line + 1 + int(row)}: column {header[col]} is not a finite number "
            f"({frame.iat[row, col]!r})"
        )
    return Dataset(x=values[:, : 2 * d], y=values[:, 2 * d:], meta=meta)


def load_dataset(path: Path) -> Dataset:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DatasetError(f"{path}: cannot read ({e})")
    try:
        dataset = parse_dataset(text)
    except DatasetError as e:
        raise type(e)(f"{path}: {e}") from None
    logger.info(f"Loaded {len(dataset)} pairs (d={dataset.d}) from {path}")
    return dataset
