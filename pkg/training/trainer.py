"""
Full-batch Adam training of a flow model on paired data, with
best-loss checkpointing and a loss history table.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from models.base import FlowModel, ParamDict
from phase.base import InvalidArgumentError, PhaseError

from .adam import Adam

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ["epoch", "mse_d", "mse_s"]


class TrainingError(PhaseError):
    """Raised when the loss or a gradient becomes NaN/Inf."""
    pass


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100_000
    lr: float = 0.1
    seed: int = 0
    w_penalty: float = 0.0
    log_every: int = 1000
    track_symplectic: bool = False
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1:
            raise InvalidArgumentError(f"epochs must be >= 1, got {self.epochs}")
        if not self.lr > 0:
            raise InvalidArgumentError(f"lr must be positive, got {self.lr}")
        if self.log_every < 1:
            raise InvalidArgumentError(f"log_every must be >= 1, got {self.log_every}")
        if self.w_penalty < 0:
            raise InvalidArgumentError(f"w_penalty must be >= 0, got {self.w_penalty}")


@dataclass
class TrainResult:
    model: FlowModel
    history: pd.DataFrame
    best_loss: float
    best_epoch: int
    summary: Dict[str, Any] = field(default_factory=dict)


def _loss_and_grads(model: FlowModel, x, y, cfg: TrainConfig):
    if cfg.w_penalty > 0:
        return model.loss_and_grads(x, y, w_penalty=cfg.w_penalty)
    return model.loss_and_grads(x, y)


def _check_finite(epoch: int, loss: float, grads: ParamDict) -> None:
    if not math.isfinite(loss):
        raise TrainingError(f"Loss became {loss} at epoch {epoch}")
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"Non-finite gradient for {name} at epoch {epoch}")


def train(model: FlowModel, dataset, cfg: TrainConfig, test=None) -> TrainResult:
    """
    Train `model` in place with full-batch Adam and restore the best parameters.

    The loss is evaluated before every update and once after the last, so
    history epochs count completed updates (0 .. cfg.epochs).

    Args:
        model: SympNet or Fnn (parameters are modified)
        dataset: Object with `.x` and `.y` arrays of shape (N, 2d)
        cfg: Training settings
        test: Optional held-out dataset reported in the summary

    Returns:
        TrainResult with the best-loss model and the loss history

    Raises:
        TrainingError: NaN/Inf loss or gradient
        InvalidArgumentError: empty data or dimension mismatch
    """
    x, y = np.asarray(dataset.x), np.asarray(dataset.y)
    if x.shape[0] == 0:
        raise InvalidArgumentError("Cannot train on an empty dataset")
    if x.shape[-1] != 2 * model.d:
        raise InvalidArgumentError(f"Data dimension {x.shape[-1]} does not match model d={model.d}")

    logger.info(
        f"Training {model.kind} ({model.parameter_count()} parameters) on {x.shape[0]} pairs: "
        f"epochs={cfg.epochs}, lr={cfg.lr}, w={cfg.w_penalty}, seed={cfg.seed}"
    )
    optimizer = Adam(lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)
    records: List[Dict[str, Any]] = []
    best_loss = math.inf
    best_epoch = 0
    best_params: Optional[ParamDict] = None

    for epoch in range(cfg.epochs + 1):
        loss, grads = _loss_and_grads(model, x, y, cfg)
        _check_finite(epoch, loss, grads)
        if loss < best_loss:
            best_loss, best_epoch = loss, epoch
            best_params = {name: value.copy() for name, value in model.params.items()}

        if epoch % cfg.log_every == 0 or epoch == cfg.epochs:
            mse_d = loss if cfg.w_penalty == 0 else model.loss(x, y)
            mse_s = model.symplectic_penalty(x) if cfg.track_symplectic else None
            records.append({"epoch": epoch, "mse_d": mse_d, "mse_s": mse_s})
            extra = f", mse_s={mse_s:.3e}" if mse_s is not None else ""
            logger.info(f"epoch {epoch}: mse_d={mse_d:.3e}{extra}")

        if epoch < cfg.epochs:
            optimizer.step(model.params, grads)

    model.set_params(best_params)
    history = pd.DataFrame.from_records(records, columns=HISTORY_COLUMNS)
    history["mse_s"] = history["mse_s"].astype(float)

    summary = {
        "kind": model.kind,
        "parameters": model.parameter_count(),
        "best_epoch": best_epoch,
        "train_mse": model.loss(x, y),
    }
    if test is not None:
        summary["test_mse"] = model.loss(test.x, test.y)
    logger.info(f"Finished training: best loss {best_loss:.3e} at epoch {best_epoch}")
    return TrainResult(model=model, history=history, best_loss=best_loss,
                       best_epoch=best_epoch, summary=summary)
