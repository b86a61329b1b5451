import itertools
import json

import numpy as np
import pytest

from models import Gate, ModelParseError, Shear, Shift, SympNet, SymplecticMap, deserialize, serialize
from phase import InvalidArgumentError, symplectic_form
from verification import fd_jacobian, gradient_check, residual


def upper_shear_map(s=2.0, scale=1.0):
    return SymplecticMap(1, [Shear("up", np.array([[s]]), scale)])


class TestPrimitives:
    def test_upper_shear(self):
        np.testing.assert_allclose(upper_shear_map()(np.array([1.0, 2.0])), [5.0, 2.0])

    def test_upper_shear_inverse(self):
        np.testing.assert_allclose(upper_shear_map().inverse()(np.array([5.0, 2.0])), [1.0, 2.0])

    def test_lower_gate(self):
        gate = SymplecticMap(1, [Gate("low", "sigmoid", 1.0)])
        np.testing.assert_allclose(gate(np.array([0.0, 0.0])), [0.0, 0.5])

    def test_shift(self):
        shift = SymplecticMap(1, [Shift(np.array([1.0, -1.0]), 0.5)])
        np.testing.assert_allclose(shift(np.array([0.0, 0.0])), [0.5, -0.5])

    def test_bad_side(self):
        with pytest.raises(InvalidArgumentError):
            Gate("left", "sigmoid", 1.0)

    def test_unknown_activation(self):
        with pytest.raises(InvalidArgumentError, match="sigmoid"):
            Gate("up", "relu", 1.0)

    def test_compose_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            upper_shear_map().then(SymplecticMap(2, []))

    def test_then_applies_left_first(self):
        shear = upper_shear_map()
        shift = SymplecticMap(1, [Shift(np.array([1.0, 0.0]), 1.0)])
        np.testing.assert_allclose(shear.then(shift)(np.array([1.0, 2.0])), [6.0, 2.0])
        np.testing.assert_allclose(shift.then(shear)(np.array([1.0, 2.0])), [6.0, 2.0])
        lower = SymplecticMap(1, [Shear("low", np.array([[1.0]]), 1.0)])
        np.testing.assert_allclose(shear.then(lower)(np.array([1.0, 2.0])), [5.0, 7.0])
        np.testing.assert_allclose(lower.then(shear)(np.array([1.0, 2.0])), [7.0, 3.0])


class TestStructure:
    def test_default_net_has_63_parameters(self):
        net = SympNet(d=1, h=0.1)
        assert net.parameter_count() == 63
        assert net.expected_parameter_count() == 63
        _, grads = net.loss_and_grads(np.zeros((1, 2)), np.ones((1, 2)))
        assert sum(g.size for g in grads.values()) == 63

    def test_trainable_gates_add_one_scalar_each(self):
        net = SympNet(d=1, h=0.1, trainable_gates=True)
        assert net.parameter_count() == 63 + 8
        assert net.gate_coefficient(0) == 1.0

    def test_sides_alternate(self):
        net = SympNet(d=2, h=0.1, k=3, n=4)
        assert net.shear_sides() == ["up", "low", "up", "low"]
        assert [net.gate_side(j) for j in range(3)] == ["low", "up", "low"]
        assert SympNet(d=1, h=0.1, n=3, shear_start="low").shear_sides() == ["low", "up", "low"]

    def test_layout_length(self):
        net = SympNet(d=1, h=0.1, k=8, n=5)
        assert len(net.to_map()) == 9 * (5 + 1) + 8

    def test_initialisation_is_small(self):
        net = SympNet(d=2, h=0.1, seed=7)
        for value in net.params.values():
            assert np.all(np.abs(value) <= 0.01)

    def test_same_seed_same_parameters(self):
        a, b = SympNet(d=1, h=0.1, seed=3), SympNet(d=1, h=0.1, seed=3)
        for name in a.params:
            np.testing.assert_array_equal(a.params[name], b.params[name])

    @pytest.mark.parametrize("kwargs", [
        {"d": 0},
        {"n": 0},
        {"k": -1},
        {"h": np.inf},
        {"shear_start": "middle"},
        {"activation": "relu"},
    ])
    def test_invalid_construction(self, kwargs):
        base = {"d": 1, "h": 0.1}
        with pytest.raises(InvalidArgumentError):
            SympNet(**{**base, **kwargs})


class TestForward:
    def test_zero_step_is_identity(self, random_sympnet):
        net = random_sympnet(h=0.0)
        x = np.array([0.3, -0.7])
        np.testing.assert_array_equal(net(x), x)

    def test_zero_step_identity_many(self, rng, randomize_params):
        for seed in range(100):
            d = 1 + seed % 3
            net = randomize_params(SympNet(d=d, h=0.0, k=1 + seed % 4, n=1 + seed % 5, seed=seed), scale=2.0)
            x = rng.uniform(-2.0, 2.0, size=2 * d)
            assert np.max(np.abs(net(x) - x)) <= 1e-14

    def test_batch_matches_points(self, random_sympnet, rng):
        net = random_sympnet()
        x = rng.uniform(-1.0, 1.0, size=(6, 2))
        batch = net(x)
        for point, out in zip(x, batch):
            np.testing.assert_allclose(net(point), out, atol=1e-15)

    def test_tanh_activation(self, random_sympnet, rng):
        net = random_sympnet(activation="tanh")
        x = rng.uniform(-1.0, 1.0, size=(4, 2))
        np.testing.assert_allclose(net.inverse()(net(x)), x, atol=1e-10)


class TestJacobian:
    def test_zero_step_gives_identity(self, random_sympnet):
        np.testing.assert_array_equal(random_sympnet(h=0.0).jacobian(np.array([0.1, 0.2])), np.eye(2))

    @pytest.mark.parametrize("d,k,n", list(itertools.product([1, 2, 3], [1, 4, 8], [1, 3, 5])))
    def test_symplectic_for_any_parameters(self, d, k, n, rng, randomize_params):
        net = randomize_params(SympNet(d=d, h=0.2, k=k, n=n), scale=0.2)
        x = rng.uniform(-1.0, 1.0, size=(10, 2 * d))
        assert np.max(residual(net.jacobian(x))) <= 1e-10

    def test_matches_finite_differences(self, rng, randomize_params):
        for seed in range(20):
            d = 1 + seed % 2
            net = randomize_params(SympNet(d=d, h=0.5, k=2, n=2, seed=seed,
                                           trainable_gates=seed % 2 == 0))
            x = rng.uniform(-1.0, 1.0, size=2 * d)
            np.testing.assert_allclose(net.jacobian(x), fd_jacobian(net, x), atol=1e-6)


class TestBackward:
    def test_perfect_fit_is_stationary(self, random_sympnet, rng):
        net = random_sympnet()
        x = rng.uniform(-1.0, 1.0, size=(10, 2))
        loss, grads = net.backward(x, net(x))
        assert loss == 0.0
        for g in grads.values():
            np.testing.assert_array_equal(g, 0.0)

    @pytest.mark.parametrize("kwargs", [
        {"d": 1},
        {"d": 2, "k": 2, "n": 2},
        {"d": 1, "trainable_gates": True},
        {"d": 1, "shear_start": "low", "activation": "tanh"},
    ])
    def test_gradients_match_finite_differences(self, kwargs, random_sympnet, rng):
        net = random_sympnet(**kwargs)
        d = kwargs["d"]
        x = rng.uniform(-1.0, 1.0, size=(8, 2 * d))
        y = rng.uniform(-1.0, 1.0, size=(8, 2 * d))
        assert gradient_check(net, x, y) <= 1e-5

    @pytest.mark.parametrize("d,k,n", list(itertools.product([1, 2], [1, 2], [1, 3])))
    def test_gradient_grid(self, d, k, n, random_sympnet, rng):
        net = random_sympnet(d=d, k=k, n=n)
        x = rng.uniform(-1.0, 1.0, size=(8, 2 * d))
        y = rng.uniform(-1.0, 1.0, size=(8, 2 * d))
        assert gradient_check(net, x, y) <= 1e-5

    def test_loss_is_mean_squared_norm(self, random_sympnet, rng):
        net = random_sympnet()
        x = rng.uniform(-1.0, 1.0, size=(5, 2))
        y = rng.uniform(-1.0, 1.0, size=(5, 2))
        expected = np.mean(np.sum((net(x) - y) ** 2, axis=1))
        assert net.loss(x, y) == pytest.approx(expected)
        assert net.loss_and_grads(x, y)[0] == pytest.approx(expected)

    def test_empty_batch(self, random_sympnet):
        with pytest.raises(InvalidArgumentError):
            random_sympnet().loss_and_grads(np.zeros((0, 2)), np.zeros((0, 2)))


class TestInverse:
    def test_round_trip(self, random_sympnet, rng):
        for d in (1, 2, 3):
            net = random_sympnet(d=d)
            x = rng.uniform(-1.0, 1.0, size=(20, 2 * d))
            assert np.max(np.abs(net.inverse()(net(x)) - x)) <= 1e-10
            assert np.max(np.abs(net(net.inverse()(x)) - x)) <= 1e-10

    def test_inverse_of_zero_step_net(self, random_sympnet):
        x = np.array([0.4, -0.1])
        np.testing.assert_array_equal(random_sympnet(h=0.0).inverse()(x), x)

    def test_inverse_is_symplectic(self, random_sympnet, rng):
        x = rng.uniform(-1.0, 1.0, size=(10, 2))
        assert np.max(residual(random_sympnet().inverse().jacobian(x))) <= 1e-10

    @pytest.mark.parametrize("d", [1, 2])
    def test_composition_of_two_nets(self, d, random_sympnet, rng):
        first = random_sympnet(d=d, k=2, n=2, h=0.3)
        second = random_sympnet(d=d, k=3, n=1, h=0.3, activation="tanh")
        composed = first.to_map().then(second.to_map())
        x = rng.uniform(-1.0, 1.0, size=(10, 2 * d))
        np.testing.assert_allclose(composed(x), second(first(x)), atol=1e-14)
        assert np.max(residual(composed.jacobian(x))) <= 1e-9
        assert np.max(np.abs(composed.inverse()(composed(x)) - x)) <= 1e-10


class TestSymmetricCompose:
    def test_zero_step(self, random_sympnet):
        x = np.array([0.2, 0.3])
        np.testing.assert_allclose(random_sympnet().symmetric_compose(0.0)(x), x, atol=1e-15)

    def test_negative_step_undoes_positive(self, random_sympnet, rng):
        net = random_sympnet()
        x = rng.uniform(-1.0, 1.0, size=(10, 2))
        there_and_back = net.symmetric_compose(net.h).then(net.symmetric_compose(-net.h))
        assert np.max(np.abs(there_and_back(x) - x)) <= 1e-9

    def test_composed_map_is_symplectic(self, random_sympnet, rng):
        x = rng.uniform(-1.0, 1.0, size=(10, 2))
        jac = random_sympnet().symmetric_compose().jacobian(x)
        form = symplectic_form(1)
        np.testing.assert_allclose(np.swapaxes(jac, -1, -2) @ form @ jac, np.broadcast_to(form, jac.shape),
                                   atol=1e-9)


class TestSerialization:
    def test_round_trip_is_exact(self, random_sympnet, rng):
        net = random_sympnet(d=2, trainable_gates=True, shear_start="low")
        back = deserialize(serialize(net))
        assert isinstance(back, SympNet)
        assert (back.d, back.h, back.k, back.n) == (net.d, net.h, net.k, net.n)
        for name, value in net.params.items():
            np.testing.assert_array_equal(back.params[name], value)
        x = rng.uniform(-1.0, 1.0, size=(3, 4))
        np.testing.assert_array_equal(back(x), net(x))

    def test_default_net_stores_63_values(self):
        data = json.loads(serialize(SympNet(d=1, h=0.1)))
        count = 0
        for unit in data["units"]:
            if unit["type"] == "linear":
                count += np.size(unit["a_raw"]) + np.size(unit["bias"])
        assert count == 63
        assert all("c" not in unit for unit in data["units"] if unit["type"] == "gate")

    def test_truncated_file(self):
        raw = serialize(SympNet(d=1, h=0.1))
        with pytest.raises(ModelParseError, match="line"):
            deserialize(raw[: len(raw) // 2])

    def test_wrong_shape_names_field(self):
        data = json.loads(serialize(SympNet(d=1, h=0.1, k=2, n=2)))
        data["units"][2]["bias"] = [0.0]
        with pytest.raises(ModelParseError, match=r"units\[2\]\.bias"):
            deserialize(json.dumps(data))

    @pytest.mark.parametrize("key, value", [
        ("trainable_gates", "false"),
        ("trainable_gates", 0),
        ("shear_start", 1),
        ("shear_start", "middle"),
    ])
    def test_bad_option_names_field(self, key, value):
        data = json.loads(serialize(SympNet(d=1, h=0.1, k=1, n=1)))
        data[key] = value
        with pytest.raises(ModelParseError, match=rf"model\.{key}"):
            deserialize(json.dumps(data))

    @pytest.mark.parametrize("key", ["trainable_gates", "shear_start"])
    def test_missing_option(self, key):
        data = json.loads(serialize(SympNet(d=1, h=0.1, k=1, n=1)))
        del data[key]
        with pytest.raises(ModelParseError, match=f"missing '{key}'"):
            deserialize(json.dumps(data))
