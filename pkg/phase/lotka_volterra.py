"""
Lotka-Volterra system in logarithmic variables:
H(p, q) = p - exp(p) + 2q - exp(q).
"""
import numpy as np

from .base import HamiltonianSystem, split


class LotkaVolterra(HamiltonianSystem):
    name = "lotka-volterra"
    d = 1

    def _energy(self, y):
        p, q = split(y, self.d)
        return (p - np.exp(p) + 2.0 * q - np.exp(q)).sum(axis=-1)

    def _gradient(self, y):
        p, q = split(y, self.d)
        return np.concatenate([1.0 - np.exp(p), 2.0 - np.exp(q)], axis=-1)
