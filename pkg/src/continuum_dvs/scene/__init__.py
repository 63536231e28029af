"""Synthetic camera views of a planar target, with lighting and occlusion."""

from continuum_dvs.scene.augment import (
    Augmentation,
    AugmentationConfig,
    OcclusionRect,
    apply_lighting,
    apply_occlusion,
    sample_augmentation,
)
from continuum_dvs.scene.camera import CameraIntrinsics
from continuum_dvs.scene.image_io import read_png, write_png
from continuum_dvs.scene.renderer import PlanarScene, render
from continuum_dvs.scene.sampling import (
    ImageBuffer,
    as_image,
    bilinear_sample,
    resize_bilinear,
)
from continuum_dvs.scene.texture import procedural_texture

__all__ = [
    "Augmentation",
    "AugmentationConfig",
    "CameraIntrinsics",
    "ImageBuffer",
    "OcclusionRect",
    "PlanarScene",
    "apply_lighting",
    "apply_occlusion",
    "as_image",
    "bilinear_sample",
    "procedural_texture",
    "read_png",
    "render",
    "resize_bilinear",
    "sample_augmentation",
    "write_png",
]
