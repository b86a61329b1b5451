"""
Experiment runner: executes one catalog preset stage by stage
(generate -> train -> rollout -> verify) and writes a manifest of every
output. A failing stage is recorded and all later stages are skipped.
"""
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from flowdata import Dataset, sample_pairs, sample_trajectory, save_dataset
from integrators import IntegratorConfig, rollout, step_map
from models import FlowModel, Fnn, SympNet, save_model
from phase import HamiltonianSystem, InvalidArgumentError, get_system
from training import TrainConfig, train
from verification import energy_drift, symplectic_residual, write_frame, write_json, write_symplectic_report

from .presets import ExperimentPreset, coordinate_names, integrator_config, load_defaults

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def build_model(kind: str, d: int, h: float, defaults: Dict[str, Any], seed: int = 0,
                **overrides) -> FlowModel:
    """
    Create an untrained model from the defaults, with keyword overrides.

    SympNet overrides: k, sublayers, activation, trainable_gates, shear_start.
    FNN overrides: hidden.
    """
    if kind == "sympnet":
        cfg = {**defaults["sympnet"], **{k: v for k, v in overrides.items() if v is not None}}
        return SympNet(d=d, h=h, k=int(cfg["k"]), n=int(cfg["sublayers"]), activation=cfg["activation"],
                       seed=seed, trainable_gates=bool(cfg["trainable_gates"]),
                       shear_start=cfg["shear_start"])
    if kind == "fnn":
        hidden = overrides.get("hidden") or defaults["fnn"]["hidden"]
        return Fnn(d=d, hidden=tuple(int(w) for w in hidden), seed=seed)
    raise InvalidArgumentError(f"Unknown model kind {kind!r}; choose from fnn, sympnet")


def history_paths(history: pd.DataFrame, out_dir: Path, kind: str) -> Dict[str, str]:
    """Write the loss history as loss_<kind>.csv and loss_<kind>.parquet."""
    out_dir = Path(out_dir)
    csv_path = write_frame(history, out_dir / f"loss_{kind}.csv")
    parquet_path = out_dir / f"loss_{kind}.parquet"
    history.to_parquet(parquet_path, index=False)
    logger.info(f"Wrote {parquet_path}")
    return {"csv": str(csv_path), "parquet": str(parquet_path)}


def rollout_frame(model_map: Callable[[np.ndarray], np.ndarray], start, steps: int, d: int,
                  system: Optional[HamiltonianSystem] = None, h: Optional[float] = None,
                  integ: Optional[IntegratorConfig] = None, with_reference: bool = False,
                  with_energy: bool = False) -> pd.DataFrame:
    """
    Roll a one-step map out from `start` and tabulate the states.

    Columns: step, p.., q.. and, on request, p.._ref, q.._ref from the
    reference integrator and H (plus H_ref with a reference).

    Raises:
        RolloutError: a model or reference step failed
    """
    names = coordinate_names(d)
    states = rollout(model_map, start, steps)
    frame = pd.DataFrame(states, columns=names)
    frame.insert(0, "step", np.arange(steps + 1))
    if with_reference:
        ref = rollout(step_map(system, h, integ or IntegratorConfig()), start, steps)
        for j, name in enumerate(names):
            frame[f"{name}_ref"] = ref[:, j]
    if with_energy:
        frame["H"] = system.energy(states)
        if with_reference:
            frame["H_ref"] = system.energy(ref)
    return frame


def run_stage(stage_id: str, fn: Callable[[], Dict[str, Any]]) -> Dict[str, Any]:
    """
    Run one stage and report it in the manifest vocabulary.

    Returns:
        {"id", "status": "success", "outputs"} or {"id", "status": "error", "error"}
    """
    logger.info(f"Running stage: {stage_id}")
    try:
        outputs = fn()
    except Exception as e:
        logger.error(f"Stage {stage_id} failed: {e}")
        return {"id": stage_id, "status": "error", "error": str(e)}
    logger.info(f"Stage {stage_id} succeeded")
    return {"id": stage_id, "status": "success", "outputs": outputs}


def _relative(paths: Dict[str, str], root: Path) -> Dict[str, str]:
    return {key: Path(p).relative_to(root).as_posix() for key, p in paths.items()}


class ExperimentRun:
    """
    State shared between the stages of one preset run.

    Args:
        preset: Catalog entry
        out_dir: Output directory (created)
        epochs: Training epochs per model
        defaults: Parsed config/defaults.json
        log_every: Training log / history interval
    """

    def __init__(self, preset: ExperimentPreset, out_dir: Path, epochs: int,
                 defaults: Optional[Dict[str, Any]] = None, log_every: Optional[int] = None):
        self.preset = preset
        self.out_dir = Path(out_dir)
        self.epochs = epochs
        self.defaults = defaults or load_defaults()
        self.log_every = log_every or self.defaults["train"]["log_every"]
        self.system = get_system(preset.system)
        self.integ = integrator_config(self.defaults)
        self.train_data: Optional[Dataset] = None
        self.test_data: Optional[Dataset] = None
        self.models: Dict[str, FlowModel] = {}
        self.metrics: Dict[str, Dict[str, Any]] = {}

    # -- stages ----------------------------------------------------------

    def generate(self) -> Dict[str, str]:
        p = self.preset
        dataset_dir = self.out_dir / "dataset"
        if p.task == "solve":
            self.train_data = sample_pairs(self.system, p.box, p.n, p.h, p.seed, self.integ)
            self.test_data = sample_pairs(self.system, p.box, p.test_n, p.h, p.test_seed, self.integ)
            paths = {
                "train": str(save_dataset(self.train_data, dataset_dir / "train.csv")),
                "test": str(save_dataset(self.test_data, dataset_dir / "test.csv")),
            }
        else:
            self.train_data = sample_trajectory(self.system, p.start, p.n, p.h, self.integ)
            paths = {"train": str(save_dataset(self.train_data, dataset_dir / "train.csv"))}
        return _relative(paths, self.out_dir)

    def train_model(self, kind: str) -> Dict[str, str]:
        p = self.preset
        t = self.defaults["train"]
        model = build_model(kind, p.d, p.h, self.defaults, seed=t["seed"])
        cfg = TrainConfig(epochs=self.epochs, lr=p.lr, seed=t["seed"], w_penalty=t["w_penalty"],
                          log_every=self.log_every, track_symplectic=p.track_symplectic,
                          beta1=t["beta1"], beta2=t["beta2"], eps=t["eps"])
        result = train(model, self.train_data, cfg, test=self.test_data)
        self.models[kind] = result.model
        self.metrics[kind] = {
            "parameters": result.summary["parameters"],
            "best_epoch": result.best_epoch,
            "train_mse": result.summary["train_mse"],
        }
        if "test_mse" in result.summary:
            self.metrics[kind]["test_mse"] = result.summary["test_mse"]

        paths = {"model": str(save_model(result.model, self.out_dir / "models" / f"{kind}.json"))}
        for key, path in history_paths(result.history, self.out_dir / "reports", kind).items():
            paths[f"loss_{key}"] = path
        return _relative(paths, self.out_dir)

    def rollout_starts(self) -> List[np.ndarray]:
        if self.preset.rollout_from_final:
            return [self.train_data.final_point]
        return [np.asarray(s, dtype=np.float64) for s in self.preset.rollout_starts]

    def energy_reference(self, start: np.ndarray) -> float:
        """Predict runs measure energy against the observed start, solve runs against each rollout start."""
        if self.preset.task == "predict":
            return float(self.system.energy(np.asarray(self.preset.start, dtype=np.float64)))
        return float(self.system.energy(start))

    def rollout_model(self, kind: str) -> Dict[str, str]:
        model = self.models[kind]
        paths = {}
        worst = 0.0
        for i, start in enumerate(self.rollout_starts()):
            frame = rollout_frame(model, start, self.preset.rollout_steps, self.preset.d, self.system,
                                  self.preset.h, self.integ, with_reference=True, with_energy=True)
            _, drift = energy_drift(self.system, frame[coordinate_names(self.preset.d)].to_numpy())
            worst = max(worst, drift)
            offset = np.max(np.abs(frame["H"].to_numpy() - self.energy_reference(start)))
            self.metrics[kind]["max_energy_error"] = max(
                self.metrics[kind].get("max_energy_error", 0.0), float(offset))
            paths[f"start_{i}"] = str(write_frame(frame, self.out_dir / "rollouts" / f"{kind}_{i}.csv"))
        self.metrics[kind]["max_energy_drift"] = worst
        return _relative(paths, self.out_dir)

    def verify_model(self, kind: str) -> Dict[str, str]:
        source = self.test_data if self.test_data is not None else self.train_data
        points = source.x[: self.defaults["verification"]["points"]]
        report = symplectic_residual(self.models[kind], points, eps=self.defaults["verification"]["eps"])
        self.metrics[kind]["max_symplectic_residual"] = report.max_residual
        self.metrics[kind]["mean_symplectic_residual"] = report.mean_residual
        paths = write_symplectic_report(report, self.out_dir / "reports", f"symplectic_{kind}")
        return _relative(paths, self.out_dir)

    # -- driver ----------------------------------------------------------

    def stages(self) -> List[tuple]:
        plan = [("generate", self.generate)]
        for kind in self.preset.models:
            plan.append((f"train_{kind}", lambda k=kind: self.train_model(k)))
        for kind in self.preset.models:
            plan.append((f"rollout_{kind}", lambda k=kind: self.rollout_model(k)))
        for kind in self.preset.models:
            plan.append((f"verify_{kind}", lambda k=kind: self.verify_model(k)))
        return plan

    def run(self) -> Dict[str, Any]:
        """
        Execute every stage, then write reports/metrics.json, the MSE table
        (solve presets) and manifest.json.

        Returns:
            The manifest
        """
        self.out_dir.mkdir(parents=True, exist_ok=True)
        results = []
        failed = None
        for stage_id, fn in self.stages():
            if failed is not None:
                logger.warning(f"Skipping {stage_id} after failure in {failed}")
                results.append({"id": stage_id, "status": "skipped", "error": f"{failed} failed"})
                continue
            result = run_stage(stage_id, fn)
            results.append(result)
            if result["status"] == "error":
                failed = stage_id

        outputs = {}
        if self.metrics:
            path = write_json(self.metrics, self.out_dir / "reports" / "metrics.json")
            outputs["metrics"] = path.relative_to(self.out_dir).as_posix()
        if self.preset.task == "solve" and self.metrics:
            path = write_frame(self.mse_table(), self.out_dir / "reports" / "mse_table.csv")
            outputs["mse_table"] = path.relative_to(self.out_dir).as_posix()

        successful = [r for r in results if r["status"] == "success"]
        logger.info(
            f"Experiment {self.preset.id} completed: {len(successful)} of {len(results)} stages successful"
        )
        manifest = {
            "preset": self.preset.id,
            "title": self.preset.title,
            "task": self.preset.task,
            "system": self.preset.system,
            "h": self.preset.h,
            "epochs": self.epochs,
            "models": list(self.preset.models),
            "stages": results,
            "outputs": outputs,
            "metrics": self.metrics,
            "created_utc": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        }
        write_json(manifest, self.out_dir / MANIFEST_NAME)
        return manifest

    def mse_table(self) -> pd.DataFrame:
        rows = [
            {"model": kind, "train_mse": m.get("train_mse"), "test_mse": m.get("test_mse")}
            for kind, m in self.metrics.items()
        ]
        return pd.DataFrame(rows, columns=["model", "train_mse", "test_mse"])


def run_experiment(preset: ExperimentPreset, out_dir: Path, epochs: int,
                   defaults: Optional[Dict[str, Any]] = None,
                   log_every: Optional[int] = None) -> Dict[str, Any]:
    """Run a preset end to end and return its manifest."""
    return ExperimentRun(preset, out_dir, epochs, defaults, log_every).run()


def manifest_failed(manifest: Dict[str, Any]) -> bool:
    return any(stage["status"] == "error" for stage in manifest["stages"])
