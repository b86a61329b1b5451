"""
Adam optimizer over a dict of parameter arrays, updated in place.
"""
import logging
from typing import Dict

import numpy as np

from phase.base import InvalidArgumentError

logger = logging.getLogger(__name__)


class Adam:
    """
    Args:
        lr: Step size
        beta1, beta2: Decay rates of the first and second moment estimates
        eps: Denominator floor
    """

    def __init__(self, lr: float = 0.001, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if not lr > 0:
            raise InvalidArgumentError(f"Learning rate must be positive, got {lr}")
        if not (0 <= beta1 < 1 and 0 <= beta2 < 1):
            raise InvalidArgumentError(f"Betas must lie in [0, 1), got {beta1}, {beta2}")
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}
        self.step_count = 0

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
        """
        Apply one bias-corrected Adam update to `params` in place.

        Raises:
            InvalidArgumentError: gradient shapes differ from parameters or
                contain NaN/Inf (nothing is updated in that case)
        """
        for name, value in params.items():
            g = grads.get(name)
            if g is None or np.shape(g) != value.shape:
                raise InvalidArgumentError(f"Gradient for {name} missing or mis-shaped")
            if not np.all(np.isfinite(g)):
                raise InvalidArgumentError(f"Non-finite gradient for {name} at step {self.step_count + 1}")

        self.step_count += 1
        bc1 = 1.0 - self.beta1 ** self.step_count
        bc2 = 1.0 - self.beta2 ** self.step_count
        step_size = self.lr / bc1

        for name, value in params.items():
            g = grads[name]
            if name not in self.m:
                self.m[name] = np.zeros_like(value)
                self.v[name] = np.zeros_like(value)
            self.m[name] *= self.beta1
            self.m[name] += (1.0 - self.beta1) * g
            self.v[name] *= self.beta2
            self.v[name] += (1.0 - self.beta2) * (g * g)
            denom = np.sqrt(self.v[name] / bc2) + self.eps
            value -= step_size * self.m[name] / denom


def adam_step(state: Adam, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
    """Functional spelling of `state.step(params, grads)`."""
    state.step(params, grads)
