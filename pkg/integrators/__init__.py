# Reference integrators and trajectory rollout
from .explicit import rk4_flow
from .gauss import TABLEAUS, ConvergenceError, IntegratorConfig, step, step_map
from .rollout import RolloutError, rollout

__all__ = [
    "TABLEAUS",
    "ConvergenceError",
    "IntegratorConfig",
    "RolloutError",
    "rk4_flow",
    "rollout",
    "step",
    "step_map",
]
