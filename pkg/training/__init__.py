# Adam optimisation of flow models
from .adam import Adam, adam_step
from .trainer import HISTORY_COLUMNS, TrainConfig, TrainingError, TrainResult, train

__all__ = [
    "Adam",
    "HISTORY_COLUMNS",
    "TrainConfig",
    "TrainResult",
    "TrainingError",
    "adam_step",
    "train",
]
