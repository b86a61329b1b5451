"""
Artifact verification script for experiment output directories.
Checks the manifest, model JSON files, dataset CSVs and rollout CSVs
written by `pipelines/cli.py exp`.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import pandas as pd

# Add project root to path
sys.path.append(str(Path(__file__).parent.parent))

from flowdata import load_dataset
from models import load_model
from phase.base import PhaseError

logger = logging.getLogger(__name__)

MANIFEST_KEYS = ["preset", "task", "system", "h", "epochs", "models", "stages", "outputs", "metrics", "created_utc"]
STAGE_STATUSES = {"success", "error", "skipped"}
METRIC_KEYS = ["parameters", "train_mse", "max_energy_drift", "max_symplectic_residual"]


def validate_manifest(manifest: Dict[str, Any]) -> List[str]:
    """
    Validate the manifest structure.

    Args:
        manifest: Parsed manifest.json

    Returns:
        List of validation errors
    """
    errors = []
    for key in MANIFEST_KEYS:
        if key not in manifest:
            errors.append(f"manifest: Missing required key '{key}'")

    stages = manifest.get("stages", [])
    if not isinstance(stages, list) or not stages:
        errors.append("manifest: 'stages' must be a nonempty array")
        return errors
    for i, stage in enumerate(stages):
        if not isinstance(stage, dict) or "id" not in stage:
            errors.append(f"manifest: stages[{i}] must be an object with an 'id'")
            continue
        status = stage.get("status")
        if status not in STAGE_STATUSES:
            errors.append(f"manifest: stage {stage['id']} has invalid status {status!r}")
        elif status == "success" and "outputs" not in stage:
            errors.append(f"manifest: stage {stage['id']} succeeded without 'outputs'")
        elif status != "success" and "error" not in stage:
            errors.append(f"manifest: stage {stage['id']} is {status} without 'error'")

    if all(s.get("status") == "success" for s in stages if isinstance(s, dict)):
        for kind in manifest.get("models", []):
            metrics = manifest.get("metrics", {}).get(kind)
            if metrics is None:
                errors.append(f"manifest: no metrics for model {kind}")
                continue
            for key in METRIC_KEYS:
                if key not in metrics:
                    errors.append(f"manifest: metrics[{kind}] missing '{key}'")
    return errors


def verify_model_file(path: Path) -> List[str]:
    try:
        load_model(path)
    except PhaseError as e:
        return [str(e)]
    return []


def verify_dataset_file(path: Path) -> List[str]:
    try:
        dataset = load_dataset(path)
    except (PhaseError, OSError) as e:
        return [f"{path}: {e}"]
    if "task" not in dataset.meta or "h" not in dataset.meta:
        return [f"{path}: meta block lacks 'task' or 'h'"]
    return []


def verify_rollout_file(path: Path) -> List[str]:
    """A rollout CSV needs a step column starting at 0 and finite states."""
    try:
        frame = pd.read_csv(path)
    except Exception as e:
        return [f"Error reading {path}: {e}"]
    errors = []
    if "step" not in frame.columns:
        errors.append(f"{path}: missing 'step' column")
    elif frame.empty or frame["step"].iloc[0] != 0:
        errors.append(f"{path}: first row must be step 0")
    states = frame.drop(columns=["step"], errors="ignore")
    if states.shape[1] < 2:
        errors.append(f"{path}: expected at least two state columns")
    if not np.isfinite(states.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)).all():
        errors.append(f"{path}: contains missing or non-finite values")
    return errors


def verify_experiment(out_dir: Path) -> Dict[str, Any]:
    """
    Verify every artifact of one experiment directory.

    Returns:
        Dictionary with verification results
    """
    out_dir = Path(out_dir)
    logger.info(f"Starting artifact verification in {out_dir}")
    manifest_path = out_dir / "manifest.json"
    if not manifest_path.exists():
        return {"status": "error", "message": "manifest.json not found", "errors": [], "verified_files": []}

    try:
        with open(manifest_path, "r", encoding="utf-8") as f:
            manifest = json.load(f)
    except json.JSONDecodeError as e:
        return {"status": "error", "message": f"Invalid JSON in {manifest_path}: {e}",
                "errors": [], "verified_files": []}

    all_errors = validate_manifest(manifest)
    verified_files = []
    checks = [
        ("models/*.json", verify_model_file),
        ("dataset/*.csv", verify_dataset_file),
        ("rollouts/*.csv", verify_rollout_file),
    ]
    for pattern, check in checks:
        for path in sorted(out_dir.glob(pattern)):
            logger.info(f"Verifying {path}")
            errors = check(path)
            if errors:
                all_errors.extend(errors)
            else:
                verified_files.append(str(path))

    for stage in manifest.get("stages", []):
        for rel in (stage.get("outputs") or {}).values():
            if not (out_dir / rel).exists():
                all_errors.append(f"manifest: output {rel} of stage {stage['id']} does not exist")

    result = {
        "status": "success" if not all_errors else "error",
        "verified_files": verified_files,
        "errors": all_errors,
    }
    logger.info(f"Verification completed: {len(verified_files)} files passed, {len(all_errors)} errors")
    if all_errors:
        logger.error("Validation errors found:")
        for error in all_errors:
            logger.error(f"  {error}")
    return result


def main(argv=None) -> int:
    """Main verification execution."""
    parser = argparse.ArgumentParser(description="Verify experiment artifacts")
    parser.add_argument("out_dir", help="Experiment output directory")
    parser.add_argument("--verbose", "-v", action="store_true", help="Verbose output")
    args = parser.parse_args(argv)

    if args.verbose:
        logging.basicConfig(level=logging.INFO)

    result = verify_experiment(Path(args.out_dir))
    if result["status"] == "success":
        print(f"✓ {len(result['verified_files'])} artifacts in {args.out_dir} passed validation")
        return 0
    print(f"Verification failed: {result.get('message', '')}")
    for error in result["errors"]:
        print(f"  {error}")
    return 1


if __name__ == "__main__":
    sys.exit(main())
