"""Closed-loop direct visual servoing through the trained regressor."""

from continuum_dvs.servo.controller import (
    PerturbationConfig,
    ServoConfig,
    ServoPlant,
    StepOutcome,
    draw_snapshot,
    run_servo,
    servo_step,
)
from continuum_dvs.servo.evaluation import (
    DEFAULT_STARTS_MM,
    SCENARIOS,
    Scenario,
    SweepReport,
    SweepRun,
    quadrant_starts,
    random_starts,
    run_sweep,
    scenario_config,
)
from continuum_dvs.servo.imaging import preprocess
from continuum_dvs.servo.metrics import difference_image, normalize_for_sad, sad
from continuum_dvs.servo.trace import PerturbationSnapshot, ServoRecord, ServoTrace

__all__ = [
    "DEFAULT_STARTS_MM",
    "SCENARIOS",
    "PerturbationConfig",
    "PerturbationSnapshot",
    "Scenario",
    "ServoConfig",
    "ServoPlant",
    "ServoRecord",
    "ServoTrace",
    "StepOutcome",
    "SweepReport",
    "SweepRun",
    "difference_image",
    "draw_snapshot",
    "normalize_for_sad",
    "preprocess",
    "quadrant_starts",
    "random_starts",
    "run_sweep",
    "sad",
    "scenario_config",
    "servo_step",
]
