"""Adam updates and the mini-batch training loop."""

from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np
import pytest

from continuum_dvs.core.exceptions import TrainingDivergedError, ValidationError
from continuum_dvs.dataset import Dataset, SampleRenderer, SpiralConfig, spiral_path
from continuum_dvs.network import (
    LayerParams,
    NetworkSpec,
    ParameterSet,
    forward,
    init_parameters,
    load_parameters,
    mse_loss,
    parse_layout,
    reference_spec,
)
from continuum_dvs.training import AdamConfig, AdamState, TrainConfig, adam_step, train

pytestmark = pytest.mark.unit


def _scalar_params(value: float = 0.0) -> ParameterSet:
    return ParameterSet((LayerParams(np.array([[value]]), np.array([value])),))


def _scalar_grads(value: float) -> dict[int, LayerParams]:
    return {0: LayerParams(np.array([[value]]), np.array([value]))}


def _linear_dataset(count: int = 16, seed: int = 0) -> Dataset:
    """Tiny images whose labels are an exact affine function of the pixels."""
    rng = np.random.default_rng(seed)
    images = rng.uniform(size=(count, 2, 2, 3)).astype(np.float32)
    mixing = rng.normal(scale=0.3, size=(12, 2))
    labels = images.reshape(count, -1).astype(np.float64) @ mixing + np.array([0.1, -0.2])
    return Dataset(images=images, labels=labels, displacements=np.zeros((count, 2)))


@pytest.fixture
def linear_spec() -> NetworkSpec:
    return parse_layout("flatten-linear2", (2, 2))


class TestAdam:
    def test_two_unit_gradient_steps_match_hand_computation(self) -> None:
        cfg = AdamConfig(learning_rate=0.1, beta1=0.9, beta2=0.999, epsilon=1e-8)
        params, state = _scalar_params(), AdamState()
        theta, m, v = 0.0, 0.0, 0.0
        for t in (1, 2):
            params, state = adam_step(params, _scalar_grads(1.0), state, cfg)
            m = 0.9 * m + 0.1
            v = 0.999 * v + 0.001
            theta -= 0.1 * (m / (1 - 0.9**t)) / (np.sqrt(v / (1 - 0.999**t)) + 1e-8)
            assert params[0].weight.item() == pytest.approx(theta, rel=1e-12)
            assert state.m[0].weight.item() == pytest.approx(m, rel=1e-12)
            assert state.v[0].weight.item() == pytest.approx(v, rel=1e-12)
        assert state.t == 2
        assert params[0].weight.item() == pytest.approx(-0.2, rel=1e-6)

    def test_first_step_moves_by_learning_rate(self) -> None:
        params, _ = adam_step(_scalar_params(), _scalar_grads(-37.0), AdamState(), AdamConfig())
        assert params[0].weight.item() == pytest.approx(1e-3, rel=1e-6)

    def test_zero_gradient_leaves_parameters_unchanged(self) -> None:
        params, state = _scalar_params(0.5), AdamState()
        for _ in range(5):
            params, state = adam_step(params, _scalar_grads(0.0), state, AdamConfig())
        assert params[0].weight.item() == 0.5

    def test_non_finite_gradient_aborts(self) -> None:
        with pytest.raises(TrainingDivergedError, match="Non-finite"):
            adam_step(_scalar_params(), _scalar_grads(np.nan), AdamState(), AdamConfig())

    def test_preserves_storage_dtype(self) -> None:
        params = _scalar_params().astype(np.float32)
        updated, _ = adam_step(params, _scalar_grads(1.0), AdamState(), AdamConfig())
        assert updated[0].weight.dtype == np.float32


class TestTrain:
    def test_zero_epochs_returns_initial_parameters(self, linear_spec: NetworkSpec) -> None:
        initial = init_parameters(linear_spec, 1)
        params, log = train(_linear_dataset(), linear_spec, initial, TrainConfig(epochs=0))
        assert params.equals(initial)
        assert log.epochs == []
        assert log.final_loss is None

    def test_fits_affine_toy_problem(self, linear_spec: NetworkSpec) -> None:
        dataset = _linear_dataset(count=64)
        features = dataset.images.reshape(64, -1).astype(np.float64)
        solution = np.linalg.lstsq(
            np.hstack([features, np.ones((64, 1))]), dataset.labels, rcond=None
        )[0]
        # epsilon >> sqrt(v) turns the update into momentum descent, which converges
        # linearly on this quadratic
        cfg = TrainConfig(epochs=2000, batch_size=64, learning_rate=1.0, adam_epsilon=1.0)
        params, log = train(dataset, linear_spec, init_parameters(linear_spec, 1), cfg)
        assert len(log.epochs) == 2000
        assert np.max(np.abs(params[1].weight - solution[:-1])) < 1e-3
        assert np.max(np.abs(params[1].bias - solution[-1])) < 1e-3

    def test_bit_identical_reruns(self, linear_spec: NetworkSpec) -> None:
        cfg = TrainConfig(epochs=3, batch_size=5, seed=9)
        initial = init_parameters(linear_spec, 2)
        first, _ = train(_linear_dataset(), linear_spec, initial, cfg)
        second, _ = train(_linear_dataset(), linear_spec, initial, cfg)
        assert first.equals(second)
        assert not first.equals(initial)

    def test_frozen_layers_never_change(self) -> None:
        spec = parse_layout("conv2-flatten-dense4-linear2", (2, 2), frozen_layers=2)
        initial = init_parameters(spec, 3)
        params, _ = train(_linear_dataset(), spec, initial, TrainConfig(epochs=2, batch_size=4))
        assert params[0].weight.tobytes() == initial[0].weight.tobytes()
        assert params[0].bias.tobytes() == initial[0].bias.tobytes()
        assert params[5].bias.tobytes() != initial[5].bias.tobytes()

    def test_epoch_callback(self, linear_spec: NetworkSpec) -> None:
        seen: list[int] = []
        train(
            _linear_dataset(),
            linear_spec,
            init_parameters(linear_spec, 0),
            TrainConfig(epochs=3),
            on_epoch=lambda record, _params: seen.append(record.epoch),
        )
        assert seen == [1, 2, 3]

    def test_input_size_mismatch_rejected(self) -> None:
        spec = parse_layout("flatten-linear2", (4, 4))
        with pytest.raises(ValidationError, match="input"):
            train(_linear_dataset(), spec, init_parameters(spec, 0), TrainConfig(epochs=1))

    def test_divergence_checkpoints_last_good_epoch(
        self, tmp_path: Path, linear_spec: NetworkSpec
    ) -> None:
        dataset = _linear_dataset()
        poisoned = Dataset(
            images=dataset.images,
            labels=np.full_like(dataset.labels, np.inf),
            displacements=dataset.displacements,
        )
        initial = init_parameters(linear_spec, 4)
        checkpoint = tmp_path / "model.cnnp"
        with pytest.raises(TrainingDivergedError) as info:
            train(poisoned, linear_spec, initial, TrainConfig(epochs=2), checkpoint_path=checkpoint)
        assert info.value.last_good_epoch == 0
        assert "last good epoch is 0" in info.value.message
        assert load_parameters(linear_spec, checkpoint).equals(initial)

    def test_log_csv(self, tmp_path: Path, linear_spec: NetworkSpec) -> None:
        _, log = train(
            _linear_dataset(), linear_spec, init_parameters(linear_spec, 0), TrainConfig(epochs=2)
        )
        lines = log.write_csv(tmp_path / "log.csv").read_text(encoding="utf-8").splitlines()
        assert "# epochs = 2" in lines
        header_end = lines.index("epoch,mean_loss,seconds")
        assert len(lines) - header_end - 1 == 2
        assert lines[header_end + 1].startswith("1,")


@pytest.mark.slow
def test_reference_network_overfits_small_dataset(sample_renderer: SampleRenderer) -> None:
    """The desk-scale layout drives the train MSE of 32 rendered views below 1e-4."""
    spec = reference_spec((64, 64))
    renderer = dataclasses.replace(sample_renderer, input_size=(64, 64))
    path = spiral_path(SpiralConfig(sample_count=32, amplitude_mm=7.0, periods=2))
    samples = [renderer.sample(i, q) for i, q in enumerate(path)]
    dataset = Dataset(
        images=np.stack([s.image for s in samples]).astype(np.float32),
        labels=np.stack([s.label for s in samples]),
        displacements=np.array([(s.q.q1, s.q.q2) for s in samples]),
    )
    params, _ = train(
        dataset, spec, init_parameters(spec, 0), TrainConfig(epochs=500, batch_size=8)
    )
    outputs, _ = forward(spec, params, dataset.images)
    train_mse, _ = mse_loss(outputs, dataset.labels)
    assert train_mse < 1e-4
