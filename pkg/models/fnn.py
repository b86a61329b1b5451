"""
Fully-connected baseline network [2d, 50, 50, 2d] with sigmoid hidden
layers and an identity output layer, plus the optional symplectic
penalty loss MSE = MSE_d + w * MSE_s.
"""
import logging
from typing import List, Sequence, Tuple

import numpy as np

from phase.base import InvalidArgumentError, check_points

from .base import FlowModel, ParamDict, check_batch, sigmoid

logger = logging.getLogger(__name__)

# Step for the central differences of the penalty gradient.
PENALTY_FD_EPS = 1e-6


class Fnn(FlowModel):
    """
    Args:
        d: Degrees of freedom (input and output size 2d)
        hidden: Hidden layer widths
        seed: Seed for Glorot-uniform initialisation (biases start at zero)
    """

    kind = "fnn"

    def __init__(self, d: int, hidden: Sequence[int] = (50, 50), seed: int = 0):
        if d < 1 or any(w < 1 for w in hidden):
            raise InvalidArgumentError(f"Invalid FNN shape d={d}, hidden={list(hidden)}")
        self.d = d
        self.sizes = [2 * d, *[int(w) for w in hidden], 2 * d]
        rng = np.random.default_rng(seed)
        self.params: ParamDict = {}
        for i, (fan_in, fan_out) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            self.params[f"dense.{i}.w"] = rng.uniform(-limit, limit, size=(fan_out, fan_in))
            self.params[f"dense.{i}.b"] = np.zeros(fan_out)

    @property
    def n_layers(self) -> int:
        return len(self.sizes) - 1

    def layer_activation(self, i: int) -> str:
        return "identity" if i == self.n_layers - 1 else "sigmoid"

    def _forward_cached(self, x: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
        # acts[i] is the input of layer i; the last entry is the output
        acts = [x]
        a = x
        for i in range(self.n_layers):
            z = a @ self.params[f"dense.{i}.w"].T + self.params[f"dense.{i}.b"]
            a = z if self.layer_activation(i) == "identity" else sigmoid(z)
            acts.append(a)
        return a, acts

    def forward(self, x, cache: bool = False):
        x = check_points(x, self.d)
        out, acts = self._forward_cached(np.atleast_2d(x))
        if x.ndim == 1:
            out = out[0]
        return (out, acts) if cache else out

    def jacobian(self, x) -> np.ndarray:
        """
        Input Jacobian W_L diag(sigma') ... diag(sigma') W_1 by the chain rule.

        Returns:
            (2d, 2d) for a point, (N, 2d, 2d) for a batch
        """
        x = check_points(x, self.d)
        _, acts = self._forward_cached(np.atleast_2d(x))
        jac = np.broadcast_to(self.params["dense.0.w"], (acts[0].shape[0],) + self.params["dense.0.w"].shape)
        for i in range(1, self.n_layers):
            s = acts[i]
            jac = self.params[f"dense.{i}.w"] @ ((s * (1.0 - s))[:, :, None] * jac)
        jac = np.array(jac)
        return jac[0] if x.ndim == 1 else jac

    def _data_loss_and_grads(self, x: np.ndarray, y: np.ndarray) -> Tuple[float, ParamDict]:
        out, acts = self._forward_cached(x)
        diff = out - y
        n_points = x.shape[0]
        loss = float(np.sum(diff * diff) / n_points)

        grads: ParamDict = {}
        g = 2.0 * diff / n_points
        for i in reversed(range(self.n_layers)):
            if self.layer_activation(i) == "sigmoid":
                s = acts[i + 1]
                g = g * s * (1.0 - s)
            grads[f"dense.{i}.w"] = g.T @ acts[i]
            grads[f"dense.{i}.b"] = g.sum(axis=0)
            g = g @ self.params[f"dense.{i}.w"]
        return loss, grads

    def _penalty_grads(self, x: np.ndarray) -> ParamDict:
        # Central differences over every parameter entry; only used when w > 0.
        grads: ParamDict = {}
        for name, value in self.params.items():
            g = np.zeros_like(value)
            flat = value.reshape(-1)
            for j in range(flat.size):
                orig = flat[j]
                flat[j] = orig + PENALTY_FD_EPS
                plus = self.symplectic_penalty(x)
                flat[j] = orig - PENALTY_FD_EPS
                minus = self.symplectic_penalty(x)
                flat[j] = orig
                g.reshape(-1)[j] = (plus - minus) / (2.0 * PENALTY_FD_EPS)
            grads[name] = g
        return grads

    def loss_and_grads(self, x, y, w_penalty: float = 0.0) -> Tuple[float, ParamDict]:
        """
        Loss MSE_d + w * MSE_s and its parameter gradient.

        The MSE_d part is exact backprop. The MSE_s part is computed by
        central differences and only when w_penalty > 0; with w = 0 no
        Jacobian is evaluated.
        """
        x, y = check_batch(x, y, self.d)
        if w_penalty < 0:
            raise InvalidArgumentError(f"w_penalty must be >= 0, got {w_penalty}")
        loss, grads = self._data_loss_and_grads(x, y)
        if w_penalty > 0:
            loss += w_penalty * self.symplectic_penalty(x)
            for name, g in self._penalty_grads(x).items():
                grads[name] += w_penalty * g
        return loss, grads

    def backward(self, x, y, w_penalty: float = 0.0) -> Tuple[float, ParamDict]:
        return self.loss_and_grads(x, y, w_penalty)

    def __repr__(self) -> str:
        return f"Fnn(sizes={self.sizes}, params={self.parameter_count()})"
