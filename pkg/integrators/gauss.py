"""
Gauss collocation reference integrators (implicit midpoint and the
2-stage order-4 Gauss method) with fixed-point stage iteration.
Used to generate ground-truth flow data and reference trajectories.
"""
import logging
from dataclasses import dataclass

import numpy as np

from phase.base import HamiltonianSystem, InvalidArgumentError, PhaseError, check_points

logger = logging.getLogger(__name__)

_SQRT3 = np.sqrt(3.0)

# Butcher tableaus (A, b) of the symplectic Gauss-Legendre methods.
TABLEAUS = {
    "implicit-midpoint": (
        np.array([[0.5]]),
        np.array([1.0]),
    ),
    "gauss4": (
        np.array([
            [0.25, 0.25 - _SQRT3 / 6.0],
            [0.25 + _SQRT3 / 6.0, 0.25],
        ]),
        np.array([0.5, 0.5]),
    ),
}


class ConvergenceError(PhaseError):
    """Raised when the stage fixed-point iteration does not converge."""
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    scheme: str = "gauss4"
    substeps: int = 10
    fp_tol: float = 1e-12
    fp_max_iter: int = 100

    def __post_init__(self):
        if self.scheme not in TABLEAUS:
            raise InvalidArgumentError(
                f"Unknown scheme {self.scheme!r}; choose from {', '.join(TABLEAUS)}"
            )
        if self.substeps < 1:
            raise InvalidArgumentError(f"substeps must be >= 1, got {self.substeps}")
        if not self.fp_tol > 0:
            raise InvalidArgumentError(f"fp_tol must be positive, got {self.fp_tol}")
        if self.fp_max_iter < 1:
            raise InvalidArgumentError(f"fp_max_iter must be >= 1, got {self.fp_max_iter}")


def _gauss_substep(system: HamiltonianSystem, y: np.ndarray, h: float,
                   cfg: IntegratorConfig) -> np.ndarray:
    a, b = TABLEAUS[cfg.scheme]
    # Stage derivatives K[i] = f(y + h * sum_j a_ij K[j]), shape (s, ..., 2d)
    k = np.stack([system.vector_field(y)] * len(b))
    for iteration in range(1, cfg.fp_max_iter + 1):
        stages = y + h * np.tensordot(a, k, axes=1)
        try:
            k_new = system.vector_field(stages)
        except InvalidArgumentError as e:
            raise ConvergenceError(f"{cfg.scheme} stage iteration diverged at iteration {iteration} (h={h})") from e
        change = float(np.max(np.abs(k_new - k)))
        k = k_new
        if change <= cfg.fp_tol:
            break
    else:
        raise ConvergenceError(
            f"{cfg.scheme} stage iteration did not converge in {cfg.fp_max_iter} "
            f"iterations (last change {change:.3e}, h={h})"
        )
    return y + h * np.tensordot(b, k, axes=1)


def step(system: HamiltonianSystem, y, h: float, cfg: IntegratorConfig = IntegratorConfig()) -> np.ndarray:
    """
    Advance a point or batch by time h with the configured Gauss scheme.

    Args:
        system: Hamiltonian system
        y: Point (2d,) or batch (N, 2d)
        h: Reported time step (may be negative or zero)
        cfg: Scheme, substeps and fixed-point settings

    Returns:
        Approximation of the exact flow phi_h(y), same shape as y

    Raises:
        ConvergenceError: stage iteration failed
        SingularityError: propagated from the system
    """
    if not np.isfinite(h):
        raise InvalidArgumentError(f"Time step must be finite, got {h}")
    y = check_points(y, system.d).copy()
    if h == 0:
        return y
    dt = h / cfg.substeps
    for _ in range(cfg.substeps):
        y = _gauss_substep(system, y, dt, cfg)
    return y


def step_map(system: HamiltonianSystem, h: float, cfg: IntegratorConfig = IntegratorConfig()):
    """Return the one-step map y -> step(system, y, h, cfg)."""
    def _map(y):
        return step(system, y, h, cfg)
    _map.__name__ = f"{system.name}_{cfg.scheme}_step"
    return _map
