"""
SympNet: Phi_h = L o (N o L)^k built from h-scaled unit-triangular
linear units L and sigma-gate units N.

Each linear unit holds n unconstrained d x d matrices a_raw (symmetrised
as S = (a_raw + a_raw^T) / 2 in all math) and a bias b of length 2d:

    L(x) = M_n ... M_1 x + h * b,   M_i = [[I, h S_i], [0, I]] or [[I, 0], [h S_i, I]]

Gate units alternate sides starting with "low". With h = 0 every unit is
the identity, so Phi_0 = I for any parameter values.
"""
import logging
from typing import Iterator, List, Optional, Tuple

import numpy as np

from phase.base import InvalidArgumentError

from .base import FlowModel, ParamDict, activation as lookup_activation, check_batch
from .maps import SIDES, Gate, Shear, Shift, SymplecticMap

logger = logging.getLogger(__name__)

INIT_SCALE = 0.01


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


class SympNet(FlowModel):
    """
    Args:
        d: Degrees of freedom
        h: Time-step scale shared by every unit (not trained)
        k: Number of gate units (k + 1 linear units)
        n: Shear sublayers per linear unit
        activation: "sigmoid" or "tanh"
        seed: Seed for the uniform [-0.01, 0.01] initialisation
        trainable_gates: Give every gate a learned scalar c (gate scale h * c)
        shear_start: Side of the first shear in each linear unit
    """

    kind = "sympnet"

    def __init__(self, d: int, h: float, k: int = 8, n: int = 5, activation: str = "sigmoid",
                 seed: int = 0, trainable_gates: bool = False, shear_start: str = "up"):
        if d < 1 or k < 0 or n < 1:
            raise InvalidArgumentError(f"Need d >= 1, k >= 0, n >= 1; got d={d}, k={k}, n={n}")
        if not np.isfinite(h):
            raise InvalidArgumentError(f"h must be finite, got {h}")
        if shear_start not in SIDES:
            raise InvalidArgumentError(f"shear_start must be 'up' or 'low', got {shear_start!r}")
        lookup_activation(activation)

        self.d = d
        self.h = float(h)
        self.k = k
        self.n = n
        self.activation = activation
        self.trainable_gates = trainable_gates
        self.shear_start = shear_start

        rng = np.random.default_rng(seed)
        self.params: ParamDict = {}
        for i in range(k + 1):
            self.params[f"linear.{i}.a"] = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(n, d, d))
            self.params[f"linear.{i}.b"] = rng.uniform(-INIT_SCALE, INIT_SCALE, size=2 * d)
        if trainable_gates:
            for j in range(k):
                self.params[f"gate.{j}.c"] = np.ones(1)

    # -- structure -------------------------------------------------------

    def shear_sides(self) -> List[str]:
        """Sides of the n sublayers of every linear unit (strictly alternating)."""
        other = "low" if self.shear_start == "up" else "up"
        return [self.shear_start if m % 2 == 0 else other for m in range(self.n)]

    @staticmethod
    def gate_side(j: int) -> str:
        return "low" if j % 2 == 0 else "up"

    def gate_coefficient(self, j: int) -> float:
        if self.trainable_gates:
            return float(self.params[f"gate.{j}.c"][0])
        return 1.0

    def _layout(self, h: float) -> Iterator[Tuple[object, tuple]]:
        """Yield (primitive, tag) in application order; tags locate the parameters."""
        sides = self.shear_sides()
        for i in range(self.k + 1):
            a = self.params[f"linear.{i}.a"]
            for m, side in enumerate(sides):
                yield Shear(side, _sym(a[m]), h), ("a", i, m)
            yield Shift(self.params[f"linear.{i}.b"], h), ("b", i)
            if i < self.k:
                yield Gate(self.gate_side(i), self.activation, h * self.gate_coefficient(i)), ("c", i)

    def to_map(self, h: Optional[float] = None) -> SymplecticMap:
        """The network as a SymplecticMap, optionally at a different step h."""
        h = self.h if h is None else float(h)
        return SymplecticMap(self.d, [prim for prim, _ in self._layout(h)])

    # -- evaluation ------------------------------------------------------

    def forward(self, x, cache: bool = False):
        """
        Evaluate Phi_h(x) for a point or batch.

        With cache=True also returns the input state of every primitive.
        """
        net_map = self.to_map()
        if cache:
            return net_map.forward_with_cache(x)
        return net_map(x)

    def jacobian(self, x) -> np.ndarray:
        return self.to_map().jacobian(x)

    def inverse(self) -> SymplecticMap:
        """Exact inverse: units reversed, shears, shifts and gates negated."""
        return self.to_map().inverse()

    def symmetric_compose(self, h: Optional[float] = None) -> SymplecticMap:
        """Phi~_h = Phi_{-h}^{-1} o Phi_h, sharing this network's parameters."""
        h = self.h if h is None else float(h)
        return self.to_map(h).then(self.to_map(-h).inverse())

    # -- training --------------------------------------------------------

    def loss_and_grads(self, x, y) -> Tuple[float, ParamDict]:
        """
        Batch MSE and its exact gradient with respect to every parameter.

        Raises:
            InvalidArgumentError: empty or inconsistent batch
        """
        x, y = check_batch(x, y, self.d)
        layout = list(self._layout(self.h))
        out = x
        inputs = []
        for prim, _ in layout:
            inputs.append(out)
            out = prim.apply(out)

        diff = out - y
        n_points = x.shape[0]
        loss = float(np.sum(diff * diff) / n_points)

        grads: ParamDict = {name: np.zeros_like(value) for name, value in self.params.items()}
        g = 2.0 * diff / n_points
        for (prim, tag), x_in in zip(reversed(layout), reversed(inputs)):
            g, local = prim.vjp(x_in, g)
            if tag[0] == "a":
                _, i, m = tag
                grads[f"linear.{i}.a"][m] += _sym(local)
            elif tag[0] == "b":
                grads[f"linear.{tag[1]}.b"] += local
            elif self.trainable_gates:
                grads[f"gate.{tag[1]}.c"][0] += self.h * local
        return loss, grads

    def backward(self, x, y) -> Tuple[float, ParamDict]:
        return self.loss_and_grads(x, y)

    def expected_parameter_count(self) -> int:
        count = (self.k + 1) * (self.n * self.d**2 + 2 * self.d)
        return count + (self.k if self.trainable_gates else 0)

    def __repr__(self) -> str:
        return (
            f"SympNet(d={self.d}, h={self.h}, k={self.k}, n={self.n}, "
            f"activation={self.activation!r}, params={self.parameter_count()})"
        )
