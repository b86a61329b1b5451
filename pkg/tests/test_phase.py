import numpy as np
import pytest

from phase import (
    SYSTEMS,
    InvalidArgumentError,
    SingularityError,
    check_points,
    eval_h,
    get_system,
    symplectic_form,
    vector_field,
)
from verification import fd_jacobian


class TestEnergy:
    def test_pendulum_at_rest(self, pendulum):
        assert eval_h(pendulum, [0.0, 0.0]) == pytest.approx(-1.0)

    def test_lotka_volterra_origin(self, lotka_volterra):
        assert eval_h(lotka_volterra, [0.0, 0.0]) == pytest.approx(-2.0)

    def test_kepler_circular_start(self, kepler):
        assert eval_h(kepler, [1.0, 0.0, 0.0, 1.0]) == pytest.approx(-0.5)

    def test_batch_matches_points(self, pendulum, rng):
        y = rng.uniform(-1.0, 1.0, size=(7, 2))
        batch = pendulum.energy(y)
        assert batch.shape == (7,)
        np.testing.assert_allclose(batch, [pendulum.energy(p) for p in y])

    def test_kepler_singularity(self, kepler):
        with pytest.raises(SingularityError):
            kepler.energy([0.3, 0.1, 0.0, 0.0])


class TestVectorField:
    def test_pendulum_equilibrium(self, pendulum):
        np.testing.assert_allclose(vector_field(pendulum, [0.0, 0.0]), [0.0, 0.0])

    def test_pendulum_moving(self, pendulum):
        np.testing.assert_allclose(vector_field(pendulum, [1.0, 0.0]), [0.0, 1.0])

    def test_kepler(self, kepler):
        np.testing.assert_allclose(vector_field(kepler, [1.0, 0.0, 0.0, 1.0]), [0.0, -1.0, 1.0, 0.0])

    @pytest.mark.parametrize("name", sorted(SYSTEMS))
    def test_field_is_tangent_to_level_sets(self, name, rng):
        system = get_system(name)
        y = rng.uniform(-1.0, 1.0, size=(50, 2 * system.d))
        if name == "kepler":
            y[:, 2:] += np.sign(y[:, 2:]) * 0.5
        dots = np.sum(system.gradient(y) * system.vector_field(y), axis=-1)
        np.testing.assert_allclose(dots, 0.0, atol=1e-12)


class TestGradient:
    @pytest.mark.parametrize("name", sorted(SYSTEMS))
    def test_matches_finite_differences(self, name, rng):
        system = get_system(name)
        y = rng.uniform(-1.0, 1.0, size=(20, 2 * system.d))
        if name == "kepler":
            y[:, 2:] += np.sign(y[:, 2:]) * 0.5
        for point in y:
            numeric = fd_jacobian(system.energy, point)
            np.testing.assert_allclose(system.gradient(point), numeric, rtol=1e-6, atol=1e-9)


class TestPhasePoints:
    def test_wrong_dimension(self):
        with pytest.raises(InvalidArgumentError):
            check_points([1.0, 2.0, 3.0], 1)

    def test_non_finite(self):
        with pytest.raises(InvalidArgumentError):
            check_points([np.nan, 0.0], 1)

    def test_invalid_argument_is_value_error(self, pendulum):
        with pytest.raises(ValueError):
            pendulum.energy([0.0, 0.0, 0.0, 0.0])

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_symplectic_form(self, d):
        form = symplectic_form(d)
        np.testing.assert_array_equal(form.T, -form)
        np.testing.assert_array_equal(form @ form, -np.eye(2 * d))


class TestRegistry:
    def test_known_systems(self):
        assert set(SYSTEMS) == {"pendulum", "lotka-volterra", "kepler", "harmonic"}
        assert get_system("kepler").d == 2

    def test_unknown_system_lists_choices(self):
        with pytest.raises(InvalidArgumentError, match="pendulum"):
            get_system("duffing")


class TestHarmonicExactFlow:
    def test_full_period(self, harmonic):
        np.testing.assert_allclose(harmonic.exact_flow([0.3, -0.2], 2 * np.pi), [0.3, -0.2], atol=1e-14)

    def test_quarter_turn(self, harmonic):
        np.testing.assert_allclose(harmonic.exact_flow([0.0, 1.0], np.pi / 2), [-1.0, 0.0], atol=1e-15)

    def test_conserves_energy(self, harmonic, rng):
        y = rng.uniform(-1.0, 1.0, size=(10, 2))
        np.testing.assert_allclose(harmonic.energy(harmonic.exact_flow(y, 0.7)), harmonic.energy(y))
