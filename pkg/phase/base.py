"""
Phase-space base definitions shared by every system.
Holds the exception hierarchy, the canonical symplectic form J and the
HamiltonianSystem interface.

State ordering is (p1..pd, q1..qd) everywhere, with J = [[0, I], [-I, 0]].
"""
import logging
from abc import ABC, abstractmethod

import numpy as np

logger = logging.getLogger(__name__)


class PhaseError(Exception):
    """Base exception for everything raised by this package."""
    pass


class InvalidArgumentError(PhaseError, ValueError):
    """Raised on dimension mismatch, non-finite input or bad settings."""
    pass


class SingularityError(PhaseError):
    """Raised when a Hamiltonian is evaluated at a singular point."""
    pass


def symplectic_form(d: int) -> np.ndarray:
    """
    Build the canonical symplectic matrix J = [[0, I_d], [-I_d, 0]].

    Args:
        d: Degrees of freedom

    Returns:
        (2d, 2d) array
    """
    if d < 1:
        raise InvalidArgumentError(f"Degrees of freedom must be positive, got {d}")
    eye = np.eye(d)
    zero = np.zeros((d, d))
    return np.block([[zero, eye], [-eye, zero]])


def check_points(y, d: int) -> np.ndarray:
    """
    Validate a phase point or a batch of phase points.

    Args:
        y: Array-like of shape (2d,), (N, 2d) or any stack (..., 2d)
        d: Expected degrees of freedom

    Returns:
        float64 array with the same shape

    Raises:
        InvalidArgumentError: wrong trailing dimension or non-finite entries
    """
    arr = np.asarray(y, dtype=np.float64)
    if arr.ndim == 0 or arr.shape[-1] != 2 * d:
        raise InvalidArgumentError(
            f"Expected phase points of length {2 * d}, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("Phase points contain NaN or Inf")
    return arr


def split(y: np.ndarray, d: int):
    """Return the (p, q) halves of a point or batch as views."""
    return y[..., :d], y[..., d:]


class HamiltonianSystem(ABC):
    """
    A canonical Hamiltonian system y' = J^{-1} grad H(y).

    Subclasses implement `_energy` and `_gradient` on validated float64
    arrays of shape (..., 2d).
    """

    name: str = ""
    d: int = 1

    def energy(self, y) -> np.ndarray:
        """Evaluate H at a point (returns a float) or a batch (returns (N,))."""
        arr = check_points(y, self.d)
        out = self._energy(arr)
        return float(out) if arr.ndim == 1 else out

    def gradient(self, y) -> np.ndarray:
        """Evaluate grad H, ordered to match the coordinates."""
        return self._gradient(check_points(y, self.d))

    def vector_field(self, y) -> np.ndarray:
        """J^{-1} grad H = (-dH/dq, dH/dp)."""
        g = self.gradient(y)
        dh_dp, dh_dq = split(g, self.d)
        return np.concatenate([-dh_dq, dh_dp], axis=-1)

    @abstractmethod
    def _energy(self, y: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def _gradient(self, y: np.ndarray) -> np.ndarray:
        ...

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r}, d={self.d})"


def eval_h(system: HamiltonianSystem, y) -> float:
    """Energy of `system` at `y`."""
    return system.energy(y)


def vector_field(system: HamiltonianSystem, y) -> np.ndarray:
    """Hamiltonian vector field of `system` at `y`."""
    return system.vector_field(y)
