"""Labelled dataset generation along the spiral path.

For every spiral sample the camera pose comes from forward kinematics, the view
is rendered, a per-sample lighting/occlusion perturbation is applied, and the
result is downscaled to the network input size. Each sample draws from its own
random stream derived from ``(seed, "dataset", index)``, so samples can be built
in any order or in parallel and the output is still byte-identical.
"""

from __future__ import annotations

import shutil
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from continuum_dvs.core.exceptions import DatasetWriteError, ValidationError
from continuum_dvs.dataset.labels import LabelMap, label_of
from continuum_dvs.dataset.manifest import Manifest, ManifestRow
from continuum_dvs.dataset.spiral import SpiralConfig, spiral_path
from continuum_dvs.kinematics import RobotGeometry, TendonDisplacement, forward_kinematics
from continuum_dvs.scene import (
    Augmentation,
    AugmentationConfig,
    CameraIntrinsics,
    PlanarScene,
    render,
    sample_augmentation,
    write_png,
)
from continuum_dvs.servo.imaging import preprocess
from continuum_dvs.utils.logging import get_logger, log_performance
from continuum_dvs.utils.seeding import TAG_DATASET, derive_rng

logger = get_logger(__name__)

IMAGE_DIR = "images"
_STAGING_DIR = ".partial"


@dataclass(frozen=True)
class DatasetSample:
    """One rendered, augmented and labelled view.

    Attributes:
        image (NDArray[np.float64]): ``(H, W, 3)`` network-size image.
        q (TendonDisplacement): Joint state of the view.
        label (NDArray[np.float64]): Mapped target.
        augmentation (Augmentation): Perturbation applied to the render.
    """

    image: NDArray[np.float64]
    q: TendonDisplacement
    label: NDArray[np.float64]
    augmentation: Augmentation


@dataclass(frozen=True)
class SampleRenderer:
    """Everything needed to build a sample from its index and joint state."""

    scene: PlanarScene
    intrinsics: CameraIntrinsics
    geometry: RobotGeometry
    augmentation: AugmentationConfig
    label_map: LabelMap
    input_size: tuple[int, int]
    seed: int

    def sample(self, index: int, q: TendonDisplacement) -> DatasetSample:
        """Render and label the ``index``-th sample."""
        rng = derive_rng(self.seed, TAG_DATASET, index)
        perturbation = sample_augmentation(
            self.augmentation,
            rng,
            width=self.intrinsics.width_px,
            height=self.intrinsics.height_px,
        )
        view = render(self.scene, forward_kinematics(q, self.geometry), self.intrinsics)
        image = preprocess(perturbation.apply(view), self.input_size)[0]
        return DatasetSample(
            image=image, q=q, label=label_of(q, self.label_map), augmentation=perturbation
        )


def _promote(staging: Path, out_dir: Path) -> None:
    """Replace the dataset in ``out_dir`` with the staged one."""
    for name in (IMAGE_DIR, "manifest.csv"):
        target = out_dir / name
        if target.is_dir():
            shutil.rmtree(target)
        elif target.exists():
            target.unlink()
        (staging / name).rename(target)
    staging.rmdir()


def generate_dataset(
    renderer: SampleRenderer,
    spiral: SpiralConfig,
    out_dir: Path | str,
    *,
    header: dict[str, str] | None = None,
    workers: int = 1,
) -> Manifest:
    """Generate the spiral dataset into ``out_dir``.

    Output is staged in a hidden subdirectory and only moved into place once
    every image and the manifest are written.

    Args:
        renderer (SampleRenderer): Scene, configs, input size and seed.
        spiral (SpiralConfig): Joint-space path.
        out_dir (Path | str): Destination directory (created if needed).
        header (dict[str, str] | None): Configuration echoed into the manifest
            header. ``seed`` is always included.
        workers (int): Threads used to render samples.

    Returns:
        Manifest: The written manifest.

    Raises:
        ValidationError: If the straight-robot view is not inside the texture.
        DatasetWriteError: If writing fails. Partial output is removed on this
            and on any other failure.
    """
    if not renderer.scene.covers_home_view(renderer.intrinsics):
        raise ValidationError(
            "Texture does not cover the home-pose view; increase plane_halfwidth",
            field="plane_halfwidth",
            value=renderer.scene.plane_halfwidth,
        )
    root = Path(out_dir)
    staging = root / _STAGING_DIR
    path = spiral_path(spiral)
    started = time.perf_counter()

    def build(index: int) -> ManifestRow:
        sample = renderer.sample(index, path[index])
        name = f"{IMAGE_DIR}/{index:06d}.png"
        write_png(staging / name, sample.image)
        return ManifestRow(
            index=index,
            q=sample.q,
            label=(float(sample.label[0]), float(sample.label[1])),
            augmentation=sample.augmentation,
            image=name,
        )

    try:
        if staging.exists():
            shutil.rmtree(staging)
        (staging / IMAGE_DIR).mkdir(parents=True)
        with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
            rows = list(pool.map(build, range(len(path))))
        manifest = Manifest(header={"seed": str(renderer.seed), **(header or {})}, rows=rows)
        manifest.write(staging)
        _promote(staging, root)
    except OSError as exc:
        shutil.rmtree(staging, ignore_errors=True)
        logger.exception("Dataset generation failed", out_dir=str(root))
        raise DatasetWriteError(
            "Failed to write dataset", path=str(root), details={"reason": str(exc)}
        ) from exc
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise

    log_performance(
        logger,
        operation="generate_dataset",
        duration_ms=(time.perf_counter() - started) * 1000.0,
        samples=len(rows),
        out_dir=str(root),
    )
    return manifest


def sample_statistics(manifest: Manifest) -> dict[str, float]:
    """Summary of a manifest's labels and displacements (for inspection)."""
    labels = np.array([row.label for row in manifest.rows], dtype=np.float64).reshape(-1, 2)
    radii = np.array([np.hypot(row.q.q1, row.q.q2) for row in manifest.rows], dtype=np.float64)
    if labels.size == 0:
        return {"samples": 0.0}
    return {
        "samples": float(len(manifest.rows)),
        "label_min": float(labels.min()),
        "label_max": float(labels.max()),
        "radius_max_mm": float(radii.max()),
        "occluded_fraction": float(
            np.mean([bool(row.augmentation.rects) for row in manifest.rows])
        ),
    }
