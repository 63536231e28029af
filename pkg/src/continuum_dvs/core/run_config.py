"""Flat ``key = value`` run configuration.

One setting per line. ``#`` at the start of a line or after whitespace starts a
comment (so values such as paths may contain ``#``); blank lines are ignored::

    seed = 7
    tendon_offset_mm = 50       # effective offset for the desk-scale scene
    network_layout = conv8-pool-conv16-pool-flatten-dense64-linear2

Every key is a field of :class:`RunConfig`; parsing rejects malformed lines,
duplicate keys, unknown keys and invalid values with a
:class:`~continuum_dvs.core.exceptions.ConfigurationError` naming the key. The
model projects itself onto the per-module configuration types, and
:meth:`RunConfig.to_text` writes the same format back (the effective-config echo
stored with every command's output).
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Any, Literal

import pydantic
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator
from pydantic.fields import FieldInfo

from continuum_dvs.core.exceptions import (
    ConfigurationError,
    ResourceNotFoundError,
    ValidationError,
)
from continuum_dvs.dataset import LabelMap, SpiralConfig
from continuum_dvs.kinematics import MM_PER_M, RobotGeometry, TendonDisplacement
from continuum_dvs.network import REFERENCE_LAYOUT, NetworkSpec, parse_layout
from continuum_dvs.scene import (
    AugmentationConfig,
    CameraIntrinsics,
    OcclusionRect,
    PlanarScene,
    procedural_texture,
    read_png,
)
from continuum_dvs.servo import (
    DEFAULT_STARTS_MM,
    PerturbationConfig,
    Scenario,
    ServoConfig,
    scenario_config,
)
from continuum_dvs.training import TrainConfig

EFFECTIVE_CONFIG_NAME = "effective_config.conf"

_COMMENT = re.compile(r"(^|\s)#.*$")


def _starts_text(points: tuple[tuple[float, float], ...]) -> str:
    return ";".join(f"{q1:g}:{q2:g}" for q1, q2 in points)


class RunConfig(BaseModel):
    """Every tunable of the pipeline, flat.

    Lengths carry their unit in the key name. Defaults reproduce the library
    defaults of each module; see ``configs/desk_scale.conf`` for the desk-scale
    experiment setup.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = Field(default=0, ge=0, description="Top-level seed for every random stream")

    # robot
    backbone_length_m: float = Field(default=0.4, gt=0, description="Backbone arc length L")
    tendon_offset_mm: float = Field(
        default=1.8, gt=0, description="Tendon distance d from the backbone axis"
    )
    backbone_radius_mm: float = Field(default=0.9, gt=0, description="Backbone radius")
    actuation_limit_mm: float = Field(default=10.0, gt=0, description="Tendon travel limit")

    # camera and scene
    image_width_px: int = Field(default=640, ge=1, description="Camera image width")
    image_height_px: int = Field(default=480, ge=1, description="Camera image height")
    horizontal_fov_deg: float = Field(
        default=19.0, gt=0, lt=180, description="Camera horizontal field of view"
    )
    plane_distance_m: float = Field(
        default=0.5, gt=0, description="Target plane stand-off from the straight-robot camera"
    )
    plane_halfwidth_m: float = Field(
        default=0.25, gt=0, description="Half the physical width of the target texture"
    )
    texture_path: str = Field(
        default="", description="Target image (PNG); empty for a procedural texture"
    )
    texture_size_px: int = Field(
        default=512, ge=8, description="Side of the procedural texture"
    )

    # dataset
    dataset_dir: str = Field(default="dataset", description="Dataset directory read by train")
    spiral_amplitude_mm: float = Field(default=7.0, gt=0, description="Spiral amplitude A")
    spiral_periods: float = Field(default=20.0, gt=0, description="Spiral turns P")
    spiral_samples: int = Field(default=5000, ge=1, description="Spiral sample count n")
    lighting_gain_min: float = Field(default=0.6, gt=0, description="Lighting gain lower bound")
    lighting_gain_max: float = Field(default=1.4, gt=0, description="Lighting gain upper bound")
    lighting_gradient_min: float = Field(default=-0.4, description="Lighting gradient lower bound")
    lighting_gradient_max: float = Field(default=0.4, description="Lighting gradient upper bound")
    occlusion_count_min: int = Field(default=0, ge=0, description="Fewest occluders per image")
    occlusion_count_max: int = Field(default=2, ge=0, description="Most occluders per image")
    occlusion_area_min: float = Field(
        default=0.02, ge=0, le=1, description="Smallest occluder area fraction"
    )
    occlusion_area_max: float = Field(
        default=0.3, ge=0, le=1, description="Largest occluder area fraction"
    )
    label_kind: Literal["tanh", "linear_clip"] = Field(
        default="tanh", description="Label mapping: tanh or linear_clip"
    )
    label_beta: float = Field(default=1.0, gt=0, description="tanh sharpness, 1/mm")
    label_clip_mm: float = Field(default=5.0, gt=0, description="linear_clip saturation")

    # network and training
    network_layout: str = Field(
        default=REFERENCE_LAYOUT, description="Dash-separated layer tokens"
    )
    input_height_px: int = Field(default=64, ge=1, description="Network input height")
    input_width_px: int = Field(default=64, ge=1, description="Network input width")
    frozen_layers: int = Field(default=0, ge=0, description="Leading layers excluded from training")
    checkpoint_path: str = Field(
        default="model.cnnp", description="Checkpoint read by servo and eval"
    )
    epochs: int = Field(default=50, ge=0, description="Training epochs")
    batch_size: int = Field(default=32, ge=1, description="Mini-batch size")
    learning_rate: float = Field(default=1e-3, gt=0, description="Adam step size")
    adam_beta1: float = Field(default=0.9, gt=0, lt=1, description="Adam first-moment decay")
    adam_beta2: float = Field(default=0.999, gt=0, lt=1, description="Adam second-moment decay")
    adam_epsilon: float = Field(default=1e-8, gt=0, description="Adam denominator epsilon")

    # servo
    servo_gain: float = Field(default=0.4, gt=0, description="Control gain lambda, mm per unit output")
    servo_dt: float = Field(default=1.0, gt=0, description="Integration interval")
    max_iterations: int = Field(default=300, ge=1, description="Iteration cap")
    convergence_epsilon: float = Field(
        default=0.05, gt=0, description="Threshold on the raw network output"
    )
    hold_count: int = Field(default=10, ge=1, description="Iterations below threshold to stop")
    start_q1_mm: float = Field(default=6.0, description="Servo start q1")
    start_q2_mm: float = Field(default=-4.0, description="Servo start q2")
    frame_stride: int = Field(
        default=0, ge=0, description="Write view/difference PNGs every k iterations (0 = off)"
    )

    # disturbances
    enable_joint_noise: bool = Field(default=False, description="Add Gaussian joint noise")
    enable_gain_scaling: bool = Field(default=False, description="Scale outputs by a random gain")
    enable_lighting: bool = Field(default=False, description="Random lighting during servoing")
    enable_occlusion: bool = Field(default=False, description="Random occlusion during servoing")
    joint_noise_std_mm: float = Field(default=0.01, ge=0, description="Joint noise std")
    gain_scale_min: float = Field(default=0.25, gt=0, description="Output gain lower bound")
    gain_scale_max: float = Field(default=4.0, gt=0, description="Output gain upper bound")
    refresh_period: int = Field(default=20, ge=1, description="Iterations between re-draws")
    perturb_occlusion_count_max: int = Field(
        default=1, ge=0, description="Most occluders per servo view"
    )
    perturb_occlusion_area_max: float = Field(
        default=0.8, ge=0, le=1, description="Largest servo occluder area fraction"
    )
    static_occlusion: str = Field(
        default="", description="Fixed rectangles x0:y0:x1:y1 separated by ';'"
    )

    # evaluation
    eval_scenario: Scenario = Field(
        default="nominal",
        description="nominal, dynamic_lighting, dynamic_occlusion, static_occlusion or all",
    )
    eval_starts: str = Field(
        default=_starts_text(DEFAULT_STARTS_MM), description="Start points q1:q2 separated by ';'"
    )
    eval_quadrant_radius_mm: float = Field(
        default=0.0, ge=0, description="Add four quadrant starts at this radius (0 = off)"
    )
    eval_random_starts: int = Field(default=0, ge=0, description="Add uniformly random starts")
    eval_seed_count: int = Field(default=1, ge=0, description="Seeds per start (seed, seed+1, ...)")

    @field_validator("start_q1_mm", "start_q2_mm")
    @classmethod
    def _start_within_limit(cls, value: float, info: ValidationInfo) -> float:
        limit = info.data.get("actuation_limit_mm")
        if limit is not None and abs(value) > limit:
            raise ValueError(f"start {value} mm exceeds the actuation limit of {limit} mm")
        return value

    # projections

    def geometry(self) -> RobotGeometry:
        return RobotGeometry(
            backbone_length=self.backbone_length_m,
            tendon_offset=self.tendon_offset_mm / MM_PER_M,
            backbone_radius=self.backbone_radius_mm / MM_PER_M,
        )

    def intrinsics(self) -> CameraIntrinsics:
        return CameraIntrinsics(
            width_px=self.image_width_px,
            height_px=self.image_height_px,
            horizontal_fov=self.horizontal_fov_deg,
        )

    def spiral(self) -> SpiralConfig:
        return SpiralConfig(
            amplitude_mm=self.spiral_amplitude_mm,
            periods=self.spiral_periods,
            sample_count=self.spiral_samples,
        )

    def augmentation(self) -> AugmentationConfig:
        return _checked(
            "occlusion_area_max",
            AugmentationConfig,
            lighting_gain_range=(self.lighting_gain_min, self.lighting_gain_max),
            lighting_gradient_range=(self.lighting_gradient_min, self.lighting_gradient_max),
            occlusion_count_range=(self.occlusion_count_min, self.occlusion_count_max),
            occlusion_area_fraction_range=(self.occlusion_area_min, self.occlusion_area_max),
        )

    def label_map(self) -> LabelMap:
        return LabelMap(kind=self.label_kind, beta=self.label_beta, clip_mm=self.label_clip_mm)

    def network_spec(self) -> NetworkSpec:
        try:
            return parse_layout(
                self.network_layout,
                (self.input_height_px, self.input_width_px),
                self.frozen_layers,
            )
        except ValidationError as exc:
            raise ConfigurationError(
                exc.message,
                key=str(exc.details.get("field", "network_layout")),
                expected="tokens convN, denseN, pool, relu, flatten ending in linear2",
                details={k: v for k, v in exc.details.items() if k != "field"},
            ) from exc

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            adam_beta1=self.adam_beta1,
            adam_beta2=self.adam_beta2,
            adam_epsilon=self.adam_epsilon,
            seed=self.seed,
        )

    def servo_config(self) -> ServoConfig:
        return ServoConfig(
            gain_lambda=self.servo_gain,
            dt=self.servo_dt,
            max_iterations=self.max_iterations,
            convergence_epsilon=self.convergence_epsilon,
            hold_count=self.hold_count,
            actuation_limit_mm=self.actuation_limit_mm,
        )

    def perturbation_config(self) -> PerturbationConfig:
        scene = _checked(
            "perturb_occlusion_area_max",
            AugmentationConfig,
            lighting_gain_range=(self.lighting_gain_min, self.lighting_gain_max),
            lighting_gradient_range=(self.lighting_gradient_min, self.lighting_gradient_max),
            occlusion_count_range=(0, self.perturb_occlusion_count_max),
            occlusion_area_fraction_range=(
                min(self.occlusion_area_min, self.perturb_occlusion_area_max),
                self.perturb_occlusion_area_max,
            ),
        )
        return _checked(
            "gain_scale_min",
            PerturbationConfig,
            joint_noise_std_mm=self.joint_noise_std_mm,
            gain_scale_range=(self.gain_scale_min, self.gain_scale_max),
            refresh_period=self.refresh_period,
            scene=scene,
            joint_noise=self.enable_joint_noise,
            gain_scaling=self.enable_gain_scaling,
            lighting=self.enable_lighting,
            occlusion=self.enable_occlusion,
            static_occlusion=self.static_rectangles(),
        )

    def eval_perturbation_config(self) -> PerturbationConfig:
        """Disturbances of the configured evaluation scenario."""
        return scenario_config(self.perturbation_config(), self.eval_scenario)

    def static_rectangles(self) -> tuple[OcclusionRect, ...]:
        try:
            return tuple(
                OcclusionRect.from_text(part.strip())
                for part in self.static_occlusion.split(";")
                if part.strip()
            )
        except ValueError as exc:
            raise ConfigurationError(
                "Malformed static occlusion rectangle",
                key="static_occlusion",
                expected="x0:y0:x1:y1 integers separated by ';'",
            ) from exc

    def start(self) -> TendonDisplacement:
        return TendonDisplacement(self.start_q1_mm, self.start_q2_mm)

    def starts(self) -> list[TendonDisplacement]:
        """Parsed ``eval_starts`` points, each inside the actuation limit."""
        points: list[TendonDisplacement] = []
        for part in self.eval_starts.split(";"):
            if not part.strip():
                continue
            try:
                q1, q2 = (float(value) for value in part.split(":"))
            except ValueError as exc:
                raise ConfigurationError(
                    "Malformed start point",
                    key="eval_starts",
                    expected="q1:q2 pairs in millimetres separated by ';'",
                    details={"value": part},
                ) from exc
            point = TendonDisplacement(q1, q2)
            if not point.within(self.actuation_limit_mm):
                raise ConfigurationError(
                    "Start point outside the actuation limit",
                    key="eval_starts",
                    expected=f"|q1|, |q2| <= {self.actuation_limit_mm} mm",
                    details={"value": part},
                )
            points.append(point)
        return points

    def scene(self) -> PlanarScene:
        """The target plane with the configured or procedural texture.

        Raises:
            ResourceNotFoundError: If ``texture_path`` names a missing file.
        """
        if self.texture_path:
            texture = read_png(self.texture_path)
        else:
            texture = procedural_texture(self.texture_size_px, self.texture_size_px, self.seed)
        return PlanarScene(
            target_texture=texture,
            plane_distance=self.plane_distance_m,
            plane_halfwidth=self.plane_halfwidth_m,
            home_height=self.backbone_length_m,
        )

    def as_pairs(self) -> dict[str, str]:
        """Every key with its value formatted as in a config file."""
        return {name: _format_value(getattr(self, name)) for name in type(self).model_fields}

    def resolve_paths(self, base_dir: Path) -> RunConfig:
        """Copy with relative file keys made relative to ``base_dir``."""
        updates: dict[str, str] = {}
        for key in ("texture_path", "dataset_dir", "checkpoint_path"):
            value = getattr(self, key)
            if value and not Path(value).is_absolute():
                updates[key] = str(base_dir / value)
        return self.model_copy(update=updates)

    def to_text(self, *, with_descriptions: bool = True) -> str:
        """Serialise every key (defaults included) in the config file format."""
        lines: list[str] = []
        for name, info in type(self).model_fields.items():
            if with_descriptions and info.description:
                lines.append(f"# {info.description}")
            lines.append(f"{name} = {_format_value(getattr(self, name))}")
        return "\n".join(lines) + "\n"


def _format_value(value: object) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _checked(key: str, model: type[BaseModel], **values: Any) -> Any:
    """Build a module config, reporting range errors against a config key."""
    try:
        return model(**values)
    except pydantic.ValidationError as exc:
        raise ConfigurationError(
            "Inconsistent configuration values",
            key=key,
            expected="ranges with min <= max inside the allowed bounds",
            details={"reason": exc.errors()[0]["msg"]},
        ) from exc


def parse_run_config(text: str, *, source: str = "<config>") -> RunConfig:
    """Parse the flat configuration format.

    Args:
        text (str): File contents.
        source (str): Name used in error details.

    Returns:
        RunConfig: Validated configuration (unset keys take their defaults).

    Raises:
        ConfigurationError: On a malformed line, duplicate key, unknown key or
            invalid value; ``details`` name the key, line and expected form.
    """
    values: dict[str, str] = {}
    lines: dict[str, int] = {}
    known = RunConfig.model_fields
    for number, raw in enumerate(text.splitlines(), start=1):
        line = _COMMENT.sub("", raw).strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigurationError(
                "Malformed configuration line",
                key=key or None,
                expected="key = value",
                details={"source": source, "line": number},
            )
        if key not in known:
            raise ConfigurationError(
                f"Unknown configuration key '{key}'",
                key=key,
                expected="a documented key (see `continuum-dvs config`)",
                details={"source": source, "line": number},
            )
        if key in values:
            raise ConfigurationError(
                f"Duplicate configuration key '{key}'",
                key=key,
                expected="each key at most once",
                details={"source": source, "line": number},
            )
        values[key] = value.strip()
        lines[key] = number

    try:
        return RunConfig.model_validate(values)
    except pydantic.ValidationError as exc:
        error = exc.errors()[0]
        key = str(error["loc"][0]) if error["loc"] else None
        field = RunConfig.model_fields.get(key or "")
        raise ConfigurationError(
            f"Invalid value for '{key}': {error['msg']}",
            key=key,
            expected=_expected_form(field),
            details={
                "source": source,
                "line": lines.get(key or ""),
                "value": values.get(key or "", ""),
            },
        ) from exc


def _expected_form(field: FieldInfo | None) -> str:
    if field is None:
        return "a valid value"
    bounds = [
        f"{name} {getattr(meta, name)}"
        for meta in field.metadata
        for name in ("gt", "ge", "lt", "le")
        if getattr(meta, name, None) is not None
    ]
    kind = getattr(field.annotation, "__name__", str(field.annotation))
    return f"{kind} {' '.join(bounds)}".strip()


def load_run_config(path: Path | str) -> RunConfig:
    """Read and parse a configuration file.

    Raises:
        ResourceNotFoundError: If the file does not exist.
        ConfigurationError: If the contents are invalid.
    """
    source = Path(path)
    if not source.is_file():
        raise ResourceNotFoundError(
            "Configuration file not found", resource_type="config", path=str(source)
        )
    return parse_run_config(source.read_text(encoding="utf-8"), source=str(source))


def write_effective_config(cfg: RunConfig, out_dir: Path | str) -> Path:
    """Echo the full effective configuration into an output directory."""
    target = Path(out_dir) / EFFECTIVE_CONFIG_NAME
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(cfg.to_text(), encoding="utf-8", newline="\n")
    return target


def override(cfg: RunConfig, **updates: object) -> RunConfig:
    """Copy with some keys replaced, re-validated."""
    try:
        return RunConfig.model_validate({**cfg.model_dump(), **updates})
    except pydantic.ValidationError as exc:
        error = exc.errors()[0]
        raise ConfigurationError(
            f"Invalid override: {error['msg']}",
            key=str(error["loc"][0]) if error["loc"] else None,
        ) from exc
