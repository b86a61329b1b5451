"""
Desk-scale reproductions of the solve and predict experiments.

These train the catalog presets for real and take minutes to half an
hour each; run them with `pytest -m slow`.
"""
import numpy as np
import pandas as pd
import pytest

from phase import get_system
from pipelines.presets import get_preset, load_defaults
from pipelines.run_experiment import manifest_failed, run_experiment

pytestmark = pytest.mark.slow

EPOCHS = 100000


@pytest.fixture(scope="module")
def solve_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("solve-pendulum")
    manifest = run_experiment(get_preset("solve-pendulum"), out, EPOCHS, load_defaults(), log_every=100)
    return out, manifest


@pytest.fixture(scope="module")
def predict_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("predict-pendulum")
    manifest = run_experiment(get_preset("predict-pendulum"), out, EPOCHS, load_defaults())
    return out, manifest


def drift_series(out, kind, index):
    frame = pd.read_csv(out / "rollouts" / f"{kind}_{index}.csv")
    h = frame["H"].to_numpy()
    return np.abs(h - h[0])


def test_solve_pendulum_mse(solve_run):
    _, manifest = solve_run
    assert not manifest_failed(manifest)
    for kind in ("fnn", "sympnet"):
        m = manifest["metrics"][kind]
        assert m["train_mse"] <= 1e-4
        assert m["test_mse"] <= 3.0 * m["train_mse"]


def test_sympnet_rollout_energy_is_bounded(solve_run):
    out, _ = solve_run
    # rollout 1 starts at (0, 1.0)
    drift = drift_series(out, "sympnet", 1)
    assert drift.max() <= 0.05
    assert drift[-1] <= 2.0 * drift[:101].max()
    assert drift_series(out, "fnn", 1).max() > drift.max()


def test_fnn_becomes_nearly_symplectic(solve_run):
    out, _ = solve_run
    history = pd.read_csv(out / "reports" / "loss_fnn.csv")
    early = history.loc[history["epoch"] == 100, "mse_s"].iloc[0]
    assert history["mse_s"].iloc[-1] <= early / 10.0


def test_predict_pendulum_energy(predict_run):
    out, manifest = predict_run
    assert not manifest_failed(manifest)
    assert manifest["metrics"]["sympnet"]["max_energy_error"] <= 0.1
    assert manifest["metrics"]["fnn"]["max_energy_error"] > 0.1

    h0 = get_system("pendulum").energy(np.array([0.0, 1.0]))
    frame = pd.read_csv(out / "rollouts" / "sympnet_0.csv")
    assert np.max(np.abs(frame["H"].to_numpy() - h0)) <= 0.1
