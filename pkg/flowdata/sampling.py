"""
Training/test data generation for both tasks:

- solve: points drawn uniformly from a box, paired with their reference flow
- predict: consecutive points of one observed reference trajectory

Sample i of a box dataset is drawn from its own PCG64 stream,
SeedSequence(seed).spawn(n)[i], so datasets do not depend on how the
work is batched.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np

from integrators.gauss import ConvergenceError, IntegratorConfig, step
from phase.base import (
    HamiltonianSystem,
    InvalidArgumentError,
    PhaseError,
    SingularityError,
    check_points,
)

logger = logging.getLogger(__name__)

MAX_RESAMPLES = 100


class DatasetError(PhaseError):
    """Base exception for dataset errors."""
    pass


@dataclass(frozen=True, eq=False)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=np.float64)
        upper = np.asarray(self.upper, dtype=np.float64)
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise InvalidArgumentError(f"Box bounds must be equal-length vectors, got {lower.shape}, {upper.shape}")
        if not np.all(lower < upper):
            raise InvalidArgumentError(f"Box needs lower < upper componentwise, got {lower} and {upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x)
        return np.all((x >= self.lower) & (x <= self.upper), axis=-1)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lower, self.upper)


@dataclass(eq=False)
class Dataset:
    x: np.ndarray
    y: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.atleast_2d(np.asarray(self.x, dtype=np.float64))
        self.y = np.atleast_2d(np.asarray(self.y, dtype=np.float64))
        if self.x.shape != self.y.shape or self.x.shape[-1] % 2:
            raise InvalidArgumentError(f"Inconsistent dataset shapes {self.x.shape} and {self.y.shape}")

    def __len__(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1] // 2

    @property
    def pairs(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        return list(zip(self.x, self.y))

    @property
    def final_point(self) -> np.ndarray:
        """Last observed state; the prediction rollout starts here."""
        if len(self) == 0:
            raise DatasetError("Dataset is empty")
        return self.y[-1].copy()


def _integrator_meta(integ: IntegratorConfig) -> Dict[str, Any]:
    return {
        "scheme": integ.scheme,
        "substeps": integ.substeps,
        "fp_tol": integ.fp_tol,
        "fp_max_iter": integ.fp_max_iter,
    }


def sample_pairs(system: HamiltonianSystem, box: Box, n: int, h: float, seed: int,
                 integ: IntegratorConfig = IntegratorConfig()) -> Dataset:
    """
    Draw n points uniformly from `box` and pair each with its reference step.

    Points where the integrator fails (singularity, no convergence) are
    redrawn from the same per-index stream, at most MAX_RESAMPLES times.

    Raises:
        InvalidArgumentError: n < 1 or box dimension != 2d
        DatasetError: a point could not be generated after all retries
    """
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    if box.dim != 2 * system.d:
        raise InvalidArgumentError(f"Box has dimension {box.dim}, system needs {2 * system.d}")

    rngs = [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(n)]
    x = np.stack([box.sample(rng) for rng in rngs])
    try:
        y = step(system, x, h, integ)
    except (SingularityError, ConvergenceError) as e:
        logger.warning(f"Batched reference step failed ({e}); stepping points one by one")
        y = np.empty_like(x)
        for i, rng in enumerate(rngs):
            x[i], y[i] = _step_with_resample(system, box, x[i], rng, h, integ, i)

    logger.info(f"Generated {n} {system.name} pairs with h={h}, seed={seed}")
    meta = {
        "task": "solve",
        "system": system.name,
        "h": h,
        "seed": seed,
        "n": n,
        "box_lower": box.lower.tolist(),
        "box_upper": box.upper.tolist(),
        **_integrator_meta(integ),
    }
    return Dataset(x=x, y=y, meta=meta)


def _step_with_resample(system, box, x0, rng, h, integ, index):
    x = x0
    for attempt in range(MAX_RESAMPLES + 1):
        try:
            return x, step(system, x, h, integ)
        except (SingularityError, ConvergenceError) as e:
            logger.warning(f"Sample {index} failed ({e}); resampling (attempt {attempt + 1})")
            x = box.sample(rng)
    raise DatasetError(f"Sample {index} failed after {MAX_RESAMPLES} resamples")


def sample_trajectory(system: HamiltonianSystem, x0, n: int, h: float,
                      integ: IntegratorConfig = IntegratorConfig()) -> Dataset:
    """
    Observe one reference trajectory x_0 .. x_n and return the n pairs
    (x_{i-1}, x_i).

    Raises:
        InvalidArgumentError: bad start or n < 1
        SingularityError, ConvergenceError: integrator failure aborts
    """
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    x0 = check_points(x0, system.d)
    if x0.ndim != 1:
        raise InvalidArgumentError("Trajectory start must be a single point")

    points = np.empty((n + 1, x0.shape[0]))
    points[0] = x0
    for i in range(n):
        points[i + 1] = step(system, points[i], h, integ)
    logger.info(f"Observed {system.name} trajectory of {n} steps from {x0.tolist()} with h={h}")
    meta = {
        "task": "predict",
        "system": system.name,
        "h": h,
        "n": n,
        "start": x0.tolist(),
        "final": points[-1].tolist(),
        **_integrator_meta(integ),
    }
    return Dataset(x=points[:-1].copy(), y=points[1:].copy(), meta=meta)
