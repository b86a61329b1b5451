import numpy as np
import pytest

from flowdata import Dataset
from models import Fnn, SympNet
from phase import InvalidArgumentError
from training import HISTORY_COLUMNS, Adam, TrainConfig, TrainingError, adam_step, train

SHEAR = np.array([[1.0, 0.1], [0.0, 1.0]])


def linear_dataset(matrix, n=100, seed=0):
    x = np.random.default_rng(seed).uniform(-1.0, 1.0, size=(n, matrix.shape[0]))
    return Dataset(x=x, y=x @ matrix.T)


class TestAdam:
    def test_zero_gradient_leaves_parameters(self):
        params = {"w": np.array([1.0, -2.0])}
        opt = Adam(lr=0.1)
        opt.step(params, {"w": np.zeros(2)})
        np.testing.assert_array_equal(params["w"], [1.0, -2.0])
        assert opt.step_count == 1

    def test_constant_gradient_moves_at_lr(self):
        params = {"w": np.zeros(3)}
        opt = Adam(lr=0.01)
        for _ in range(100):
            opt.step(params, {"w": np.array([0.5, -2.0, 1e-3])})
        np.testing.assert_allclose(params["w"], [-1.0, 1.0, -1.0], rtol=1e-4)

    def test_functional_step_matches_method(self):
        a, b = {"w": np.ones(2)}, {"w": np.ones(2)}
        opt_a, opt_b = Adam(lr=0.05), Adam(lr=0.05)
        for g in ([0.3, -0.1], [0.2, 0.4], [-1.0, 0.0]):
            opt_a.step(a, {"w": np.array(g)})
            adam_step(opt_b, b, {"w": np.array(g)})
        np.testing.assert_array_equal(a["w"], b["w"])

    def test_non_finite_gradient_updates_nothing(self):
        params = {"a": np.ones(2), "b": np.ones(1)}
        opt = Adam()
        with pytest.raises(InvalidArgumentError):
            opt.step(params, {"a": np.zeros(2), "b": np.array([np.nan])})
        np.testing.assert_array_equal(params["a"], 1.0)
        assert opt.step_count == 0

    def test_mis_shaped_gradient(self):
        with pytest.raises(InvalidArgumentError):
            Adam().step({"w": np.ones(2)}, {"w": np.ones(3)})

    @pytest.mark.parametrize("kwargs", [{"lr": 0.0}, {"beta1": 1.0}, {"beta2": -0.1}])
    def test_invalid_settings(self, kwargs):
        with pytest.raises(InvalidArgumentError):
            Adam(**kwargs)


class TestTrainConfig:
    def test_zero_epochs_rejected(self):
        with pytest.raises(InvalidArgumentError):
            TrainConfig(epochs=0)

    @pytest.mark.parametrize("kwargs", [{"lr": -0.1}, {"log_every": 0}, {"w_penalty": -1.0}])
    def test_invalid_values(self, kwargs):
        with pytest.raises(InvalidArgumentError):
            TrainConfig(**kwargs)


class TestTrain:
    def test_fits_linear_shear(self):
        data = linear_dataset(SHEAR)
        net = SympNet(d=1, h=0.1, k=0, n=1)
        result = train(net, data, TrainConfig(epochs=3000, lr=0.01, log_every=1000))
        assert result.best_loss <= 1e-10
        np.testing.assert_allclose(net(np.array([0.0, 1.0])), [0.1, 1.0], atol=1e-4)

        losses = result.history["mse_d"].to_numpy()
        for before, after in zip(losses[:-1], losses[1:]):
            if before > 1e-14:
                assert after <= before * (1.0 - 1e-6)

    def test_learns_near_identity(self):
        # Default architecture (k=8, n=5), 100 points, 2000 epochs.
        data = linear_dataset(np.eye(2))
        net = SympNet(d=1, h=0.1)
        initial = net.loss(data.x, data.y)
        result = train(net, data, TrainConfig(epochs=2000, lr=0.01, log_every=500))
        assert result.best_loss <= 1e-5
        assert result.best_loss < initial / 100

    def test_history_layout(self):
        data = linear_dataset(SHEAR, n=20)
        result = train(SympNet(d=1, h=0.1, k=1, n=2), data,
                       TrainConfig(epochs=50, lr=0.01, log_every=20, track_symplectic=True))
        assert list(result.history.columns) == HISTORY_COLUMNS
        assert result.history["epoch"].tolist() == [0, 20, 40, 50]
        assert result.history["mse_s"].max() <= 1e-20

    def test_restores_best_parameters(self):
        data = linear_dataset(SHEAR, n=20)
        net = SympNet(d=1, h=0.1, k=1, n=2)
        result = train(net, data, TrainConfig(epochs=200, lr=0.05, log_every=50))
        assert result.model is net
        assert net.loss(data.x, data.y) == pytest.approx(result.best_loss, rel=1e-10)
        assert result.summary["train_mse"] == pytest.approx(result.best_loss, rel=1e-10)
        assert result.summary["parameters"] == net.parameter_count()

    def test_reports_test_mse(self):
        data, test = linear_dataset(SHEAR, n=20), linear_dataset(SHEAR, n=10, seed=1)
        result = train(Fnn(d=1, hidden=(4,)), data, TrainConfig(epochs=10, lr=0.01), test=test)
        assert result.summary["kind"] == "fnn"
        assert result.summary["test_mse"] == pytest.approx(result.model.loss(test.x, test.y))
        assert result.history["mse_s"].isna().all()

    def test_runs_are_bit_identical(self):
        data = linear_dataset(SHEAR, n=30)
        runs = []
        for _ in range(2):
            net = Fnn(d=1, hidden=(6, 6), seed=4)
            runs.append(train(net, data, TrainConfig(epochs=100, lr=0.01, log_every=10)))
        for name, value in runs[0].model.params.items():
            np.testing.assert_array_equal(runs[1].model.params[name], value)
        assert runs[0].history.equals(runs[1].history)

    def test_penalised_fnn_training(self):
        data = linear_dataset(SHEAR, n=10)
        result = train(Fnn(d=1, hidden=(3,)), data, TrainConfig(epochs=5, lr=0.01, w_penalty=0.1))
        assert np.isfinite(result.best_loss)

    def test_nan_loss_aborts(self, monkeypatch):
        net = SympNet(d=1, h=0.1, k=1, n=1)
        grads = {name: np.zeros_like(v) for name, v in net.params.items()}
        monkeypatch.setattr(net, "loss_and_grads", lambda x, y: (float("nan"), grads))
        with pytest.raises(TrainingError, match="epoch 0"):
            train(net, linear_dataset(SHEAR, n=5), TrainConfig(epochs=5))

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            train(SympNet(d=2, h=0.1), linear_dataset(SHEAR, n=5), TrainConfig(epochs=1))
