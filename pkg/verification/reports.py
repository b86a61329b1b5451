"""
Writers for verification artifacts: per-point CSV tables and JSON summaries.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict

import numpy as np
import pandas as pd

from .checks import SymplecticReport

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def write_json(data: Dict[str, Any], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_jsonable(data), f, ensure_ascii=False, indent=2)
        f.write("\n")
    logger.info(f"Wrote {path}")
    return path


def write_frame(frame: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def write_symplectic_report(report: SymplecticReport, out_dir: Path, name: str) -> Dict[str, str]:
    """
    Write `<name>.csv` (point coordinates and residual) and `<name>.json` (max, mean).

    Returns:
        Mapping of artifact kind to written path
    """
    out_dir = Path(out_dir)
    csv_path = write_frame(report.to_frame(), out_dir / f"{name}.csv")
    json_path = write_json(report.summary(), out_dir / f"{name}.json")
    return {"csv": str(csv_path), "json": str(json_path)}
