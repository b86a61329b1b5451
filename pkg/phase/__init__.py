# Hamiltonian systems and phase-space primitives
from .base import (
    HamiltonianSystem,
    InvalidArgumentError,
    PhaseError,
    SingularityError,
    check_points,
    eval_h,
    symplectic_form,
    vector_field,
)
from .harmonic import Harmonic
from .kepler import Kepler
from .lotka_volterra import LotkaVolterra
from .pendulum import Pendulum

SYSTEMS = {
    cls.name: cls
    for cls in (Pendulum, LotkaVolterra, Kepler, Harmonic)
}


def get_system(name: str) -> HamiltonianSystem:
    """
    Look up a built-in system by its CLI name.

    Raises:
        InvalidArgumentError: unknown name
    """
    try:
        return SYSTEMS[name]()
    except KeyError:
        raise InvalidArgumentError(
            f"Unknown system {name!r}; choose from {', '.join(sorted(SYSTEMS))}"
        ) from None


__all__ = [
    "HamiltonianSystem",
    "Harmonic",
    "InvalidArgumentError",
    "Kepler",
    "LotkaVolterra",
    "Pendulum",
    "PhaseError",
    "SYSTEMS",
    "SingularityError",
    "check_points",
    "eval_h",
    "get_system",
    "symplectic_form",
    "vector_field",
]
