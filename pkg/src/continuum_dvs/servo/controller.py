"""Proportional image-based controller closing the loop through the regressor.

Each iteration renders the eye-in-hand view at the current joint state, applies
the active disturbances, evaluates the network and integrates
``v = -lambda * s * f`` into the tendon displacements. The network is trained
with the target at ``q = 0``, so its output is itself the error signal.

Disturbances (all optional):

* output gain ``s`` drawn from ``gain_scale_range``
* lighting gain/gradient and dynamic occlusion drawn from ``scene``
* Gaussian noise added to the integrated joint state
* static occlusion rectangles present at every iteration

Gain, lighting and dynamic occlusion are re-drawn whenever
``iteration % refresh_period == 0``; joint noise is drawn every iteration.
"""

from __future__ import annotations

import math
import time
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from continuum_dvs.core.exceptions import ValidationError
from continuum_dvs.dataset.labels import LabelMap, displacement_of
from continuum_dvs.kinematics import RobotGeometry, TendonDisplacement, forward_kinematics
from continuum_dvs.network import NetworkSpec, ParameterSet, predict
from continuum_dvs.scene import (
    Augmentation,
    AugmentationConfig,
    CameraIntrinsics,
    ImageBuffer,
    OcclusionRect,
    PlanarScene,
    apply_occlusion,
    render,
    sample_augmentation,
)
from continuum_dvs.servo.imaging import preprocess
from continuum_dvs.servo.metrics import normalize_for_sad, sad
from continuum_dvs.servo.trace import PerturbationSnapshot, ServoRecord, ServoTrace
from continuum_dvs.utils.logging import get_logger, log_performance
from continuum_dvs.utils.seeding import TAG_SERVO, derive_rng

logger = get_logger(__name__)


class ServoConfig(BaseModel):
    """Control law and stopping rule.

    Attributes:
        gain_lambda (float): Millimetres of tendon travel per unit output per step.
        dt (float): Integration interval.
        max_iterations (int): Iteration cap.
        convergence_epsilon (float): Threshold on ``||f||_inf`` of the raw output.
        hold_count (int): Consecutive iterations below the threshold to stop.
        actuation_limit_mm (float): Symmetric tendon travel limit (clamped).
    """

    model_config = ConfigDict(frozen=True)

    gain_lambda: float = Field(default=0.4, gt=0)
    dt: float = Field(default=1.0, gt=0)
    max_iterations: int = Field(default=300, ge=1)
    convergence_epsilon: float = Field(default=0.05, gt=0)
    hold_count: int = Field(default=10, ge=1)
    actuation_limit_mm: float = Field(default=10.0, gt=0)


def _perturbation_scene() -> AugmentationConfig:
    return AugmentationConfig(
        occlusion_count_range=(0, 1), occlusion_area_fraction_range=(0.05, 0.8)
    )


class PerturbationConfig(BaseModel):
    """Disturbance models and which of them are active.

    Attributes:
        joint_noise_std_mm (float): Std of the noise added to q each iteration.
        gain_scale_range (tuple[float, float]): Bounds of the output gain ``s``.
        refresh_period (int): Iterations between re-draws.
        scene (AugmentationConfig): Lighting and dynamic occlusion ranges.
        joint_noise (bool): Enable joint noise.
        gain_scaling (bool): Enable output gain scaling.
        lighting (bool): Enable random lighting.
        occlusion (bool): Enable random dynamic occlusion.
        static_occlusion (tuple[OcclusionRect, ...]): Rectangles applied to every view.
    """

    model_config = ConfigDict(frozen=True)

    joint_noise_std_mm: float = Field(default=0.01, ge=0)
    gain_scale_range: tuple[float, float] = (0.25, 4.0)
    refresh_period: int = Field(default=20, ge=1)
    scene: AugmentationConfig = Field(default_factory=_perturbation_scene)
    joint_noise: bool = False
    gain_scaling: bool = False
    lighting: bool = False
    occlusion: bool = False
    static_occlusion: tuple[OcclusionRect, ...] = ()

    @model_validator(mode="after")
    def _check_gain_range(self) -> PerturbationConfig:
        low, high = self.gain_scale_range
        if low <= 0 or low > high:
            msg = f"gain_scale_range must be positive with min <= max, got {self.gain_scale_range}"
            raise ValueError(msg)
        return self

    @property
    def any_enabled(self) -> bool:
        return (
            self.joint_noise
            or self.gain_scaling
            or self.lighting
            or self.occlusion
            or bool(self.static_occlusion)
        )


@dataclass(frozen=True)
class ServoPlant:
    """Simulated robot, camera, scene and trained regressor.

    ``target_star`` is the normalised unperturbed view at ``q = 0``.
    """

    scene: PlanarScene
    intrinsics: CameraIntrinsics
    geometry: RobotGeometry
    spec: NetworkSpec
    params: ParameterSet
    label_map: LabelMap = field(default_factory=LabelMap)
    target_star: NDArray[np.float64] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.params.check_against(self.spec)
        home = render(
            self.scene,
            forward_kinematics(TendonDisplacement(0.0, 0.0), self.geometry),
            self.intrinsics,
        )
        object.__setattr__(self, "target_star", normalize_for_sad(home))

    def observe(
        self, q: TendonDisplacement, snapshot: PerturbationSnapshot, static: tuple[OcclusionRect, ...]
    ) -> ImageBuffer:
        """Camera view at ``q`` with the active disturbances applied."""
        view = render(self.scene, forward_kinematics(q, self.geometry), self.intrinsics)
        return apply_occlusion(snapshot.augmentation.apply(view), static)

    def infer(self, view: ImageBuffer) -> tuple[float, float]:
        """Raw network output for a camera view."""
        output = predict(self.spec, self.params, preprocess(view, self.spec.input_size))[0]
        return float(output[0]), float(output[1])


def draw_snapshot(
    cfg: PerturbationConfig, rng: np.random.Generator, iteration: int, *, width: int, height: int
) -> PerturbationSnapshot:
    """Re-draw gain, lighting and dynamic occlusion.

    The same number of values is drawn whether or not a disturbance is enabled,
    so toggling one does not shift the others' streams.
    """
    scale = float(rng.uniform(*cfg.gain_scale_range))
    drawn = sample_augmentation(cfg.scene, rng, width=width, height=height)
    augmentation = Augmentation(
        gain=drawn.gain if cfg.lighting else 1.0,
        gradient=drawn.gradient if cfg.lighting else 0.0,
        rects=drawn.rects if cfg.occlusion else (),
    )
    return PerturbationSnapshot(
        gain_scale=scale if cfg.gain_scaling else 1.0,
        augmentation=augmentation,
        refreshed_at=iteration,
    )


@dataclass(frozen=True)
class StepOutcome:
    """Result of one :func:`servo_step`."""

    q_next: TendonDisplacement
    record: ServoRecord
    snapshot: PerturbationSnapshot
    view: ImageBuffer
    view_star: NDArray[np.float64] | None


def servo_step(
    q: TendonDisplacement,
    plant: ServoPlant,
    servo_cfg: ServoConfig,
    perturb_cfg: PerturbationConfig,
    rng: np.random.Generator,
    iteration: int,
    snapshot: PerturbationSnapshot | None = None,
) -> StepOutcome:
    """Run one control iteration.

    Args:
        q (TendonDisplacement): Current joint state, within the actuation limit.
        plant (ServoPlant): Simulation and network.
        servo_cfg (ServoConfig): Control law.
        perturb_cfg (PerturbationConfig): Disturbances.
        rng (np.random.Generator): Run stream, advanced in place.
        iteration (int): 0-based iteration number.
        snapshot (PerturbationSnapshot | None): Disturbances carried over from
            the previous iteration (re-drawn on refresh boundaries).

    Returns:
        StepOutcome: Next joint state, trace record and active snapshot.

    Raises:
        ValidationError: If ``q`` lies outside the actuation limit.
    """
    limit = servo_cfg.actuation_limit_mm
    if not q.within(limit):
        raise ValidationError(
            "Joint state outside the actuation limit",
            field="q",
            value=(q.q1, q.q2),
            details={"limit_mm": limit},
        )
    if snapshot is None or iteration % perturb_cfg.refresh_period == 0:
        snapshot = draw_snapshot(
            perturb_cfg,
            rng,
            iteration,
            width=plant.intrinsics.width_px,
            height=plant.intrinsics.height_px,
        )

    view = plant.observe(q, snapshot, perturb_cfg.static_occlusion)
    f = plant.infer(view)
    scaled = (snapshot.gain_scale * f[0], snapshot.gain_scale * f[1])
    v = (-servo_cfg.gain_lambda * scaled[0], -servo_cfg.gain_lambda * scaled[1])

    noise = np.zeros(2)
    if perturb_cfg.joint_noise:
        noise = rng.normal(0.0, perturb_cfg.joint_noise_std_mm, size=2)
    q_next = TendonDisplacement(
        q.q1 + v[0] * servo_cfg.dt + float(noise[0]),
        q.q2 + v[1] * servo_cfg.dt + float(noise[1]),
    ).clamped(limit)

    view_star: NDArray[np.float64] | None
    try:
        view_star = normalize_for_sad(view)
        error = sad(view_star, plant.target_star)
    except ValidationError:
        view_star = None
        error = math.nan
        logger.warning("Constant camera view; SAD undefined", iteration=iteration)

    record = ServoRecord(
        iteration=iteration,
        q=q,
        f=f,
        v=v,
        estimate=displacement_of(np.asarray(f), plant.label_map),
        sad=error,
        snapshot=snapshot,
    )
    return StepOutcome(q_next=q_next, record=record, snapshot=snapshot, view=view, view_star=view_star)


FrameSink = Callable[[StepOutcome], None]


def run_servo(
    start: TendonDisplacement,
    plant: ServoPlant,
    servo_cfg: ServoConfig,
    perturb_cfg: PerturbationConfig,
    seed: int,
    *,
    run_index: int = 0,
    on_step: FrameSink | None = None,
) -> ServoTrace:
    """Iterate :func:`servo_step` until convergence or the iteration cap.

    Convergence is declared once ``||f||_inf < convergence_epsilon`` has held for
    ``hold_count`` consecutive iterations. A start outside the actuation limit is
    clamped to it.

    Args:
        start (TendonDisplacement): Initial joint state.
        plant (ServoPlant): Simulation and network.
        servo_cfg (ServoConfig): Control law and stopping rule.
        perturb_cfg (PerturbationConfig): Disturbances.
        seed (int): Top-level seed; the run stream is ``(seed, "servo", run_index)``.
        run_index (int): Index of this run within a sweep.
        on_step (FrameSink | None): Called with every step outcome (frame output).

    Returns:
        ServoTrace: One record per iteration.
    """
    rng = derive_rng(seed, TAG_SERVO, run_index)
    if not start.within(servo_cfg.actuation_limit_mm):
        logger.warning(
            "Start outside the actuation limit; clamped",
            start_mm=(start.q1, start.q2),
            limit_mm=servo_cfg.actuation_limit_mm,
        )
        start = start.clamped(servo_cfg.actuation_limit_mm)
    trace = ServoTrace(start=start, seed=seed)
    q = start
    snapshot: PerturbationSnapshot | None = None
    hold = 0
    started = time.perf_counter()

    for iteration in range(servo_cfg.max_iterations):
        outcome = servo_step(q, plant, servo_cfg, perturb_cfg, rng, iteration, snapshot)
        trace.records.append(outcome.record)
        if on_step is not None:
            on_step(outcome)
        q, snapshot = outcome.q_next, outcome.snapshot
        f = outcome.record.f
        hold = hold + 1 if max(abs(f[0]), abs(f[1])) < servo_cfg.convergence_epsilon else 0
        if hold >= servo_cfg.hold_count:
            trace.converged = True
            trace.converged_iteration = iteration
            break

    trace.final_q = q
    log_performance(
        logger,
        operation="run_servo",
        duration_ms=(time.perf_counter() - started) * 1000.0,
        success=trace.converged,
        start_mm=(start.q1, start.q2),
        iterations=trace.iterations,
        final_norm_mm=trace.final_norm,
    )
    return trace
