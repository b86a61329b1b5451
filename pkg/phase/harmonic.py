"""
Harmonic oscillator H(p, q) = (p^2 + q^2) / 2.
Its flow is a rotation of phase space, which makes it the exact oracle
for integrator and rollout tests.
"""
import numpy as np

from .base import HamiltonianSystem, check_points, split


class Harmonic(HamiltonianSystem):
    name = "harmonic"
    d = 1

    def _energy(self, y):
        p, q = split(y, self.d)
        return 0.5 * (p**2 + q**2).sum(axis=-1)

    def _gradient(self, y):
        return y.copy()

    def exact_flow(self, y, t: float) -> np.ndarray:
        """
        Closed-form flow: p(t) = p cos t - q sin t, q(t) = q cos t + p sin t.

        Args:
            y: Point or batch
            t: Time

        Returns:
            State after time t, same shape as y
        """
        arr = check_points(y, self.d)
        p, q = split(arr, self.d)
        c, s = np.cos(t), np.sin(t)
        return np.concatenate([c * p - s * q, c * q + s * p], axis=-1)
