"""Shared fixtures: a small camera, a procedural scene and tiny networks."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from continuum_dvs.dataset import LabelMap, SampleRenderer
from continuum_dvs.kinematics import RobotGeometry
from continuum_dvs.network import NetworkSpec, ParameterSet, init_parameters, parse_layout
from continuum_dvs.scene import AugmentationConfig, CameraIntrinsics, PlanarScene, procedural_texture

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture
def geometry() -> RobotGeometry:
    """Section with a wide tendon offset so millimetre moves stay small bends."""
    return RobotGeometry(tendon_offset=0.05)


@pytest.fixture
def intrinsics() -> CameraIntrinsics:
    return CameraIntrinsics(width_px=80, height_px=60, horizontal_fov=19.0)


@pytest.fixture
def texture() -> np.ndarray:
    return procedural_texture(128, 128, seed=11)


@pytest.fixture
def scene(texture: np.ndarray) -> PlanarScene:
    return PlanarScene(target_texture=texture, plane_distance=0.5, plane_halfwidth=0.25)


@pytest.fixture
def tiny_spec() -> NetworkSpec:
    """Small conv net on 16x16 inputs."""
    return parse_layout("conv4-pool-conv4-pool-flatten-dense8-linear2", (16, 16))


@pytest.fixture
def tiny_params(tiny_spec: NetworkSpec) -> ParameterSet:
    return init_parameters(tiny_spec, seed=5)


@pytest.fixture
def sample_renderer(
    scene: PlanarScene,
    intrinsics: CameraIntrinsics,
    geometry: RobotGeometry,
) -> SampleRenderer:
    return SampleRenderer(
        scene=scene,
        intrinsics=intrinsics,
        geometry=geometry,
        augmentation=AugmentationConfig(),
        label_map=LabelMap(),
        input_size=(16, 16),
        seed=3,
    )


@pytest.fixture
def smoke_config_path() -> Path:
    return CONFIG_DIR / "smoke.conf"
