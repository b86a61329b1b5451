"""
Generic trajectory rollout of any one-step map (reference integrator or
trained network).
"""
import logging
from typing import Callable

import numpy as np

from phase.base import InvalidArgumentError, PhaseError

logger = logging.getLogger(__name__)


class RolloutError(PhaseError):
    """
    Raised when a step fails mid-rollout.

    Attributes:
        prefix: States computed before the failure, shape (k + 1, 2d)
    """

    def __init__(self, message: str, prefix: np.ndarray):
        super().__init__(message)
        self.prefix = prefix


def rollout(step_map: Callable[[np.ndarray], np.ndarray], y0, n_steps: int) -> np.ndarray:
    """
    Iterate a one-step map.

    Args:
        step_map: Map taking a phase point to the next one
        y0: Start point (2d,)
        n_steps: Number of steps (0 gives just y0)

    Returns:
        Array of shape (n_steps + 1, 2d) with row 0 equal to y0

    Raises:
        RolloutError: a step raised or produced a non-finite state; the
            computed prefix is attached and the original error chained
    """
    if n_steps < 0:
        raise InvalidArgumentError(f"n_steps must be >= 0, got {n_steps}")
    y0 = np.asarray(y0, dtype=np.float64)
    if y0.ndim != 1:
        raise InvalidArgumentError(f"Rollout start must be a single point, got shape {y0.shape}")

    states = np.empty((n_steps + 1, y0.shape[0]))
    states[0] = y0
    for k in range(n_steps):
        try:
            nxt = np.asarray(step_map(states[k]), dtype=np.float64)
            if nxt.shape != y0.shape:
                raise InvalidArgumentError(
                    f"Step map returned shape {nxt.shape}, expected {y0.shape}"
                )
            if not np.all(np.isfinite(nxt)):
                raise InvalidArgumentError("Step map produced a non-finite state")
        except PhaseError as e:
            logger.error(f"Rollout aborted at step {k + 1}/{n_steps}: {e}")
            raise RolloutError(f"Rollout failed at step {k + 1}: {e}", states[: k + 1].copy()) from e
        states[k + 1] = nxt
    return states
