"""
Classical explicit Runge-Kutta (order 4) with a tiny fixed step.
Not symplectic; used only as a brute-force accuracy oracle.
"""
import numpy as np

from phase.base import HamiltonianSystem, InvalidArgumentError, check_points


def rk4_flow(system: HamiltonianSystem, y, t: float, dt: float = 1e-5) -> np.ndarray:
    """
    Integrate y over time t with RK4 steps of size at most dt.

    Args:
        system: Hamiltonian system
        y: Point or batch
        t: Total time (sign gives direction)
        dt: Maximum step size

    Returns:
        State at time t
    """
    if not dt > 0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    y = check_points(y, system.d).copy()
    n = max(1, int(np.ceil(abs(t) / dt)))
    h = t / n
    f = system.vector_field
    for _ in range(n):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y
