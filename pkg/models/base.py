"""
Shared model plumbing: exceptions, activations and the interface both
network kinds implement.
"""
import copy
import logging
from abc import ABC, abstractmethod
from typing import Dict, Tuple

import numpy as np

from phase.base import InvalidArgumentError, PhaseError, check_points, symplectic_form

logger = logging.getLogger(__name__)

# Parameters and their gradients share this layout: name -> array.
ParamDict = Dict[str, np.ndarray]


class ModelError(PhaseError):
    """Base exception for model errors."""
    pass


class ModelParseError(ModelError):
    """Raised when a model file cannot be parsed; the message names the location."""
    pass


def sigmoid(x: np.ndarray) -> np.ndarray:
    # Split by sign so exp never overflows.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


ACTIVATIONS = {
    # name -> (sigma, derivative expressed through the cached activation value)
    "sigmoid": (sigmoid, lambda s: s * (1.0 - s)),
    "tanh": (np.tanh, lambda t: 1.0 - t * t),
}


def activation(name: str):
    """Look up (sigma, sigma' from sigma) by name."""
    try:
        return ACTIVATIONS[name]
    except KeyError:
        raise InvalidArgumentError(
            f"Unknown activation {name!r}; choose from {', '.join(ACTIVATIONS)}"
        ) from None


def check_batch(x, y, d: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Validate a training batch of paired points.

    Raises:
        InvalidArgumentError: empty batch or inconsistent shapes
    """
    x = np.atleast_2d(check_points(x, d))
    y = np.atleast_2d(check_points(y, d))
    if x.shape[0] == 0:
        raise InvalidArgumentError("Batch is empty")
    if x.shape != y.shape:
        raise InvalidArgumentError(f"Batch inputs {x.shape} and targets {y.shape} differ")
    return x, y


class FlowModel(ABC):
    """
    A trainable one-step map R^{2d} -> R^{2d}.

    `params` is a dict of arrays updated in place by the optimizer;
    `loss_and_grads` returns gradients under the same keys.
    """

    kind: str = ""
    d: int
    params: ParamDict

    @abstractmethod
    def forward(self, x) -> np.ndarray:
        ...

    @abstractmethod
    def jacobian(self, x) -> np.ndarray:
        ...

    @abstractmethod
    def loss_and_grads(self, x, y) -> Tuple[float, ParamDict]:
        ...

    def __call__(self, x) -> np.ndarray:
        return self.forward(x)

    def loss(self, x, y) -> float:
        """Data loss MSE_d = mean over points of the squared error norm."""
        x, y = check_batch(x, y, self.d)
        diff = self.forward(x) - y
        return float(np.mean(np.sum(diff * diff, axis=-1)))

    def parameter_count(self) -> int:
        return int(sum(v.size for v in self.params.values()))

    def copy(self):
        return copy.deepcopy(self)

    def set_params(self, params: ParamDict) -> None:
        """Overwrite parameter values in place (shapes must match)."""
        for name, value in params.items():
            if self.params[name].shape != np.shape(value):
                raise InvalidArgumentError(
                    f"Parameter {name} has shape {self.params[name].shape}, got {np.shape(value)}"
                )
            self.params[name][...] = value

    def symplectic_penalty(self, x) -> float:
        """MSE_s = mean over points of ||Jac^T J Jac - J||_F^2."""
        x = np.atleast_2d(check_points(x, self.d))
        jac = self.jacobian(x)
        form = symplectic_form(self.d)
        res = np.swapaxes(jac, -1, -2) @ form @ jac - form
        return float(np.mean(np.sum(res * res, axis=(-2, -1))))
