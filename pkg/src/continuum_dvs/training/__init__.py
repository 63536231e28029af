"""Adam optimisation of the regressor on a generated dataset."""

from continuum_dvs.training.adam import AdamConfig, AdamState, adam_step
from continuum_dvs.training.trainer import EpochRecord, TrainConfig, TrainingLog, train

__all__ = [
    "AdamConfig",
    "AdamState",
    "EpochRecord",
    "TrainConfig",
    "TrainingLog",
    "adam_step",
    "train",
]
