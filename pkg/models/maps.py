"""
Symplectic maps as ordered compositions of three primitives:

- Shear: (p, q) -> (p + c * S q, q) ("up") or (p, q + c * S p) ("low"), S symmetric
- Shift: x -> x + c * b
- Gate:  (p, q) -> (p + c * sigma(q), q) ("up") or (p, q + c * sigma(p)) ("low")

Each primitive is inverted by negating its scale c, so every composition
has an exact inverse obtained by reversing the tuple.
"""
import logging
from dataclasses import dataclass, replace
from typing import List, Tuple

import numpy as np

from phase.base import InvalidArgumentError, check_points

from .base import activation

logger = logging.getLogger(__name__)

SIDES = ("up", "low")


def _check_side(side: str) -> None:
    if side not in SIDES:
        raise InvalidArgumentError(f"Side must be 'up' or 'low', got {side!r}")


@dataclass(frozen=True, eq=False)
class Shear:
    side: str
    s: np.ndarray
    scale: float

    def __post_init__(self):
        _check_side(self.side)

    def apply(self, x: np.ndarray) -> np.ndarray:
        d = self.s.shape[0]
        out = x.copy()
        if self.side == "up":
            out[..., :d] += self.scale * (x[..., d:] @ self.s)
        else:
            out[..., d:] += self.scale * (x[..., :d] @ self.s)
        return out

    def vjp(self, x: np.ndarray, g: np.ndarray):
        """Pull back g through the shear; also return dLoss/dS for a batch x."""
        d = self.s.shape[0]
        g_in = g.copy()
        if self.side == "up":
            src, tgt = slice(d, None), slice(None, d)
        else:
            src, tgt = slice(None, d), slice(d, None)
        g_in[:, src] += self.scale * (g[:, tgt] @ self.s.T)
        grad_s = self.scale * (x[:, src].T @ g[:, tgt])
        return g_in, grad_s

    def push(self, x: np.ndarray, jac: np.ndarray) -> np.ndarray:
        d = self.s.shape[0]
        out = jac.copy()
        if self.side == "up":
            out[..., :d, :] += self.scale * (self.s.T @ jac[..., d:, :])
        else:
            out[..., d:, :] += self.scale * (self.s.T @ jac[..., :d, :])
        return out

    def inverted(self) -> "Shear":
        return replace(self, scale=-self.scale)


@dataclass(frozen=True, eq=False)
class Shift:
    b: np.ndarray
    scale: float

    def apply(self, x: np.ndarray) -> np.ndarray:
        return x + self.scale * self.b

    def vjp(self, x: np.ndarray, g: np.ndarray):
        return g, self.scale * g.sum(axis=0)

    def push(self, x: np.ndarray, jac: np.ndarray) -> np.ndarray:
        return jac

    def inverted(self) -> "Shift":
        return replace(self, scale=-self.scale)


@dataclass(frozen=True)
class Gate:
    side: str
    activation: str
    scale: float

    def __post_init__(self):
        _check_side(self.side)
        activation(self.activation)

    def _halves(self, x: np.ndarray):
        d = x.shape[-1] // 2
        if self.side == "up":
            return slice(d, None), slice(None, d)
        return slice(None, d), slice(d, None)

    def apply(self, x: np.ndarray) -> np.ndarray:
        sigma, _ = activation(self.activation)
        src, tgt = self._halves(x)
        out = x.copy()
        out[..., tgt] += self.scale * sigma(x[..., src])
        return out

    def vjp(self, x: np.ndarray, g: np.ndarray):
        """Pull back g; also return dLoss/dscale."""
        sigma, dsigma = activation(self.activation)
        src, tgt = self._halves(x)
        s = sigma(x[:, src])
        g_in = g.copy()
        g_in[:, src] += self.scale * dsigma(s) * g[:, tgt]
        return g_in, float(np.sum(g[:, tgt] * s))

    def push(self, x: np.ndarray, jac: np.ndarray) -> np.ndarray:
        sigma, dsigma = activation(self.activation)
        src, tgt = self._halves(x)
        slope = dsigma(sigma(x[..., src]))
        out = jac.copy()
        out[..., tgt, :] += self.scale * slope[..., :, None] * jac[..., src, :]
        return out

    def inverted(self) -> "Gate":
        return replace(self, scale=-self.scale)


class SymplecticMap:
    """
    Composition of primitives, applied left to right.

    Calling the map accepts a point (2d,) or a batch (N, 2d).
    """

    def __init__(self, d: int, primitives):
        self.d = d
        self.primitives: Tuple = tuple(primitives)

    def __call__(self, x) -> np.ndarray:
        out = check_points(x, self.d)
        for prim in self.primitives:
            out = prim.apply(out)
        return out

    def forward_with_cache(self, x) -> Tuple[np.ndarray, List[np.ndarray]]:
        """Apply the map and keep the input of every primitive for backprop."""
        out = check_points(x, self.d)
        inputs = []
        for prim in self.primitives:
            inputs.append(out)
            out = prim.apply(out)
        return out, inputs

    def jacobian(self, x) -> np.ndarray:
        """
        Analytic Jacobian d(map)/dx by forward accumulation.

        Returns:
            (2d, 2d) for a point, (N, 2d, 2d) for a batch
        """
        x = check_points(x, self.d)
        jac = np.broadcast_to(np.eye(2 * self.d), x.shape[:-1] + (2 * self.d, 2 * self.d)).copy()
        for prim in self.primitives:
            jac = prim.push(x, jac)
            x = prim.apply(x)
        return jac

    def inverse(self) -> "SymplecticMap":
        return SymplecticMap(self.d, [p.inverted() for p in reversed(self.primitives)])

    def then(self, other: "SymplecticMap") -> "SymplecticMap":
        """Map that applies self first, then other."""
        if other.d != self.d:
            raise InvalidArgumentError(f"Cannot compose maps of dimension {self.d} and {other.d}")
        return SymplecticMap(self.d, self.primitives + other.primitives)

    def __len__(self) -> int:
        return len(self.primitives)

    def __repr__(self) -> str:
        return f"SymplecticMap(d={self.d}, primitives={len(self.primitives)})"
