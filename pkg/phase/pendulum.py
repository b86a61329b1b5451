"""
Mathematical pendulum (m = l = g = 1): H(p, q) = p^2 / 2 - cos(q).
"""
import numpy as np

from .base import HamiltonianSystem, split


class Pendulum(HamiltonianSystem):
    name = "pendulum"
    d = 1

    def _energy(self, y):
        p, q = split(y, self.d)
        return (0.5 * p**2 - np.cos(q)).sum(axis=-1)

    def _gradient(self, y):
        p, q = split(y, self.d)
        return np.concatenate([p, np.sin(q)], axis=-1)
