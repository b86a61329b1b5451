"""
Numerical oracles and geometric diagnostics: finite-difference
Jacobians, symplectic residuals, energy drift and gradient checks.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
import pandas as pd

from phase.base import HamiltonianSystem, InvalidArgumentError, PhaseError, symplectic_form

logger = logging.getLogger(__name__)

DEFAULT_EPS = 1e-5
# Denominator floor of the relative gradient error.
GRADIENT_FLOOR = 1e-8


class ThresholdViolation(PhaseError):
    """Raised when a diagnostic exceeds the requested threshold."""
    pass


def fd_jacobian(fn: Callable[[np.ndarray], np.ndarray], x, eps: float = DEFAULT_EPS) -> np.ndarray:
    """
    Central-difference Jacobian of fn at a single point x.

    Column j is (fn(x + eps e_j) - fn(x - eps e_j)) / (2 eps).
    """
    if not eps > 0:
        raise InvalidArgumentError(f"eps must be positive, got {eps}")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidArgumentError(f"fd_jacobian needs a single point, got shape {x.shape}")
    columns = []
    for j in range(x.shape[0]):
        e = np.zeros_like(x)
        e[j] = eps
        columns.append((np.asarray(fn(x + e)) - np.asarray(fn(x - e))) / (2.0 * eps))
    return np.stack(columns, axis=-1)


def residual(jac: np.ndarray) -> np.ndarray:
    """||Jac^T J Jac - J||_F for one Jacobian or a stack of them."""
    form = symplectic_form(jac.shape[-1] // 2)
    res = np.swapaxes(jac, -1, -2) @ form @ jac - form
    return np.sqrt(np.sum(res * res, axis=(-2, -1)))


@dataclass(eq=False)
class SymplecticReport:
    points: np.ndarray
    residuals: np.ndarray
    max_residual: float
    source: str = "analytic"

    @property
    def mean_residual(self) -> float:
        return float(np.mean(self.residuals))

    def to_frame(self) -> pd.DataFrame:
        d = self.points.shape[1] // 2
        names = [f"p{i + 1}" for i in range(d)] + [f"q{i + 1}" for i in range(d)]
        frame = pd.DataFrame(self.points, columns=names)
        frame["residual"] = self.residuals
        return frame

    def summary(self) -> dict:
        return {
            "points": int(self.points.shape[0]),
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "jacobian": self.source,
        }


def symplectic_residual(source, points, eps: float = DEFAULT_EPS) -> SymplecticReport:
    """
    Per-point symplectic residual of a map.

    Args:
        source: Object with an analytic `jacobian(points)` (models, maps) or
            a plain callable, differentiated with fd_jacobian
        points: (N, 2d) evaluation points
        eps: Finite-difference step when no analytic Jacobian exists

    Returns:
        SymplecticReport
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[0] == 0:
        raise InvalidArgumentError("symplectic_residual needs at least one point")
    if hasattr(source, "jacobian"):
        jac = source.jacobian(points)
        kind = "analytic"
    else:
        jac = np.stack([fd_jacobian(source, x, eps) for x in points])
        kind = "finite-difference"
    res = residual(jac)
    return SymplecticReport(points=points, residuals=res, max_residual=float(np.max(res)), source=kind)


def energy_drift(system: HamiltonianSystem, trajectory) -> Tuple[np.ndarray, float]:
    """
    Energy error H(y_k) - H(y_0) along a trajectory.

    Returns:
        (drift series of length K, max absolute drift)
    """
    trajectory = np.atleast_2d(np.asarray(trajectory, dtype=np.float64))
    if trajectory.shape[0] == 0:
        raise InvalidArgumentError("energy_drift needs a nonempty trajectory")
    energies = system.energy(trajectory)
    drift = energies - energies[0]
    return drift, float(np.max(np.abs(drift)))


def gradient_check(model, x, y, eps: float = 1e-6, **loss_kwargs) -> float:
    """
    Worst relative error between analytic and central-difference gradients.

    Each parameter entry is perturbed in place and restored. The relative
    error uses max(|analytic|, |numeric|, 1e-8) as denominator.

    Args:
        model: Model with `params` and `loss_and_grads(x, y, **loss_kwargs)`
        x, y: Batch
        eps: Perturbation size

    Returns:
        Maximum relative error over all parameter entries
    """
    _, grads = model.loss_and_grads(x, y, **loss_kwargs)
    worst = 0.0
    for name, value in model.params.items():
        flat = value.reshape(-1)
        analytic = grads[name].reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + eps
            plus, _ = model.loss_and_grads(x, y, **loss_kwargs)
            flat[j] = orig - eps
            minus, _ = model.loss_and_grads(x, y, **loss_kwargs)
            flat[j] = orig
            numeric = (plus - minus) / (2.0 * eps)
            denom = max(abs(analytic[j]), abs(numeric), GRADIENT_FLOOR)
            worst = max(worst, abs(analytic[j] - numeric) / denom)
    logger.info(f"Gradient check on {model.kind}: max relative error {worst:.3e}")
    return worst


def assert_below(name: str, value: float, threshold: float) -> None:
    """Raise ThresholdViolation if value > threshold."""
    if value > threshold:
        raise ThresholdViolation(f"{name} = {value:.3e} exceeds threshold {threshold:.3e}")
    logger.info(f"{name} = {value:.3e} within threshold {threshold:.3e}")
