"""Mini-batch training loop: shuffle, forward, MSE, backward, Adam.

Each epoch draws its batch order from a stream derived from
``(seed, "shuffle", epoch)``; the last partial batch is kept. Given the same
dataset, initial parameters and configuration the final parameters are
bit-identical across runs.
"""

from __future__ import annotations

import csv
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from continuum_dvs.core.exceptions import TrainingDivergedError, ValidationError
from continuum_dvs.dataset import Dataset
from continuum_dvs.network import (
    NetworkSpec,
    ParameterSet,
    backward,
    forward,
    mse_loss,
    save_parameters,
)
from continuum_dvs.training.adam import AdamConfig, AdamState, adam_step
from continuum_dvs.utils.logging import get_logger, log_performance
from continuum_dvs.utils.seeding import TAG_SHUFFLE, derive_rng

logger = get_logger(__name__)


class TrainConfig(BaseModel):
    """Training hyperparameters.

    Attributes:
        epochs (int): Passes over the dataset (0 returns the initial parameters).
        batch_size (int): Samples per update.
        learning_rate (float): Adam step size.
        adam_beta1 (float): First-moment decay.
        adam_beta2 (float): Second-moment decay.
        adam_epsilon (float): Denominator stabiliser.
        seed (int): Shuffle seed.
    """

    model_config = ConfigDict(frozen=True)

    epochs: int = Field(default=50, ge=0)
    batch_size: int = Field(default=32, ge=1)
    learning_rate: float = Field(default=1e-3, gt=0)
    adam_beta1: float = Field(default=0.9, gt=0, lt=1)
    adam_beta2: float = Field(default=0.999, gt=0, lt=1)
    adam_epsilon: float = Field(default=1e-8, gt=0)
    seed: int = Field(default=0, ge=0)

    def adam(self) -> AdamConfig:
        return AdamConfig(
            learning_rate=self.learning_rate,
            beta1=self.adam_beta1,
            beta2=self.adam_beta2,
            epsilon=self.adam_epsilon,
        )


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    mean_loss: float
    seconds: float


@dataclass
class TrainingLog:
    """Per-epoch train-set loss and timing, with the configuration echoed."""

    config: dict[str, str] = field(default_factory=dict)
    epochs: list[EpochRecord] = field(default_factory=list)

    @property
    def final_loss(self) -> float | None:
        return self.epochs[-1].mean_loss if self.epochs else None

    def write_csv(self, path: Path | str) -> Path:
        """Write ``epoch,mean_loss,seconds`` rows after ``# key = value`` lines."""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with target.open("w", encoding="utf-8", newline="") as handle:
            for key, value in self.config.items():
                handle.write(f"# {key} = {value}\n")
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(("epoch", "mean_loss", "seconds"))
            for record in self.epochs:
                writer.writerow((record.epoch, repr(record.mean_loss), f"{record.seconds:.3f}"))
        return target


EpochCallback = Callable[[EpochRecord, ParameterSet], None]


def train(
    dataset: Dataset,
    spec: NetworkSpec,
    params: ParameterSet,
    cfg: TrainConfig,
    *,
    checkpoint_path: Path | str | None = None,
    on_epoch: EpochCallback | None = None,
) -> tuple[ParameterSet, TrainingLog]:
    """Fit ``params`` to the dataset labels.

    Args:
        dataset (Dataset): Images and labels.
        spec (NetworkSpec): Network layout; frozen layers are never updated.
        params (ParameterSet): Initial parameters.
        cfg (TrainConfig): Hyperparameters and shuffle seed.
        checkpoint_path (Path | str | None): Where to save the last good
            parameters if training diverges.
        on_epoch (EpochCallback | None): Called after every epoch.

    Returns:
        tuple[ParameterSet, TrainingLog]: Final parameters and the loss log.

    Raises:
        ValidationError: If the dataset is empty or its image size differs from
            the network input.
        TrainingDivergedError: On a non-finite loss or gradient; carries the last
            good epoch (0 = initial parameters).
    """
    if len(dataset) == 0:
        raise ValidationError("Dataset is empty", field="dataset")
    if dataset.input_size != spec.input_size:
        raise ValidationError(
            "Dataset image size does not match the network input",
            field="dataset",
            details={"dataset": str(dataset.input_size), "network": str(spec.input_size)},
        )
    params.check_against(spec)

    adam_cfg = cfg.adam()
    state = AdamState()
    log = TrainingLog(config={k: str(v) for k, v in cfg.model_dump().items()})
    count = len(dataset)
    started = time.perf_counter()

    for epoch in range(1, cfg.epochs + 1):
        epoch_start = time.perf_counter()
        last_good = params
        order = derive_rng(cfg.seed, TAG_SHUFFLE, epoch).permutation(count)
        loss_sum = 0.0
        try:
            for start in range(0, count, cfg.batch_size):
                batch = order[start : start + cfg.batch_size]
                outputs, cache = forward(spec, params, dataset.images[batch])
                loss, grad = mse_loss(outputs, dataset.labels[batch])
                if not np.isfinite(loss):
                    raise TrainingDivergedError("Non-finite loss", details={"epoch": epoch})
                params, state = adam_step(params, backward(spec, params, cache, grad), state, adam_cfg)
                loss_sum += loss * len(batch)
        except TrainingDivergedError as exc:
            if checkpoint_path is not None:
                save_parameters(last_good, checkpoint_path)
            logger.error(
                "Training diverged",
                epoch=epoch,
                last_good_epoch=epoch - 1,
                reason=exc.message,
            )
            raise TrainingDivergedError(
                f"Training diverged in epoch {epoch}; last good epoch is {epoch - 1}",
                last_good_epoch=epoch - 1,
                details={**exc.details, "checkpoint": str(checkpoint_path or "")},
            ) from exc

        record = EpochRecord(
            epoch=epoch, mean_loss=loss_sum / count, seconds=time.perf_counter() - epoch_start
        )
        log.epochs.append(record)
        logger.info("Epoch complete", epoch=epoch, mean_loss=record.mean_loss)
        if on_epoch is not None:
            on_epoch(record, params)

    log_performance(
        logger,
        operation="train",
        duration_ms=(time.perf_counter() - started) * 1000.0,
        epochs=cfg.epochs,
        samples=count,
        final_loss=log.final_loss,
    )
    return params, log
