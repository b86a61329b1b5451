"""
Planar Kepler problem (unit masses and gravitational constant):
H(p, q) = |p|^2 / 2 - 1 / |q|, state (p1, p2, q1, q2).
"""
import logging

import numpy as np

from .base import HamiltonianSystem, SingularityError, split

logger = logging.getLogger(__name__)

# Radius below which the potential is treated as singular.
MIN_RADIUS = 1e-12


class Kepler(HamiltonianSystem):
    name = "kepler"
    d = 2

    def _radius(self, q: np.ndarray) -> np.ndarray:
        r = np.sqrt((q**2).sum(axis=-1))
        if np.any(r < MIN_RADIUS):
            raise SingularityError(f"Kepler potential is singular at radius {float(np.min(r)):.3e}")
        return r

    def _energy(self, y):
        p, q = split(y, self.d)
        return 0.5 * (p**2).sum(axis=-1) - 1.0 / self._radius(q)

    def _gradient(self, y):
        p, q = split(y, self.d)
        r = self._radius(q)
        return np.concatenate([p, q / r[..., None] ** 3], axis=-1)
