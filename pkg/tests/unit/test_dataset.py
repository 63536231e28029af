"""Spiral path, label mapping, manifests and dataset generation."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from continuum_dvs.core.exceptions import DatasetWriteError, ResourceNotFoundError, ValidationError
from continuum_dvs.dataset import (
    MANIFEST_NAME,
    LabelMap,
    Manifest,
    ManifestRow,
    SampleRenderer,
    SpiralConfig,
    displacement_of,
    generate_dataset,
    label_of,
    load_dataset,
    read_manifest,
    sample_statistics,
    spiral_path,
    spiral_point,
)
from continuum_dvs.kinematics import TendonDisplacement
from continuum_dvs.scene import Augmentation, OcclusionRect, PlanarScene

pytestmark = pytest.mark.unit


class TestSpiral:
    def test_endpoint_returns_to_first_axis(self) -> None:
        end = spiral_point(5000, SpiralConfig())
        assert end.q1 == pytest.approx(7.0)
        assert end.q2 == pytest.approx(0.0, abs=1e-9)

    def test_midpoint_is_half_amplitude(self) -> None:
        mid = spiral_point(2500, SpiralConfig())
        assert mid.q1 == pytest.approx(3.5)
        assert mid.q2 == pytest.approx(0.0, abs=1e-9)

    def test_sign_changes_track_periods(self) -> None:
        q1 = np.array([q.q1 for q in spiral_path(SpiralConfig())])
        changes = int(np.sum(np.sign(q1[1:]) != np.sign(q1[:-1])))
        assert abs(changes - 40) <= 1

    def test_sample_count_and_bound(self) -> None:
        path = spiral_path(SpiralConfig(sample_count=300, amplitude_mm=5.0, periods=3))
        assert len(path) == 300
        assert max(math.hypot(q.q1, q.q2) for q in path) == pytest.approx(5.0)

    def test_densest_near_origin(self) -> None:
        radii = np.array([math.hypot(q.q1, q.q2) for q in spiral_path(SpiralConfig())])

        def density(low: float, high: float) -> float:
            count = np.sum((radii >= low) & (radii < high))
            return count / (math.pi * (high**2 - low**2))

        assert density(0.5, 1.5) > density(3.0, 4.0) > density(5.5, 6.5)


class TestLabels:
    def test_origin_maps_to_zero(self) -> None:
        np.testing.assert_array_equal(label_of(TendonDisplacement(0.0, 0.0), LabelMap()), [0.0, 0.0])

    def test_tanh_values(self) -> None:
        label = label_of(TendonDisplacement(5.0, -1.0), LabelMap())
        assert label[0] == pytest.approx(0.99991, abs=1e-5)
        assert label[1] == pytest.approx(-0.76159, abs=1e-5)

    def test_linear_clip_saturates(self) -> None:
        label_map = LabelMap(kind="linear_clip", clip_mm=4.0)
        np.testing.assert_allclose(label_of(TendonDisplacement(2.0, -9.0), label_map), [0.5, -1.0])

    @given(
        q1=st.floats(min_value=-7.0, max_value=7.0),
        q2=st.floats(min_value=-7.0, max_value=7.0),
        beta=st.floats(min_value=0.2, max_value=2.0),
    )
    def test_tanh_inverts_inside_range(self, q1: float, q2: float, beta: float) -> None:
        label_map = LabelMap(beta=beta)
        label = label_of(TendonDisplacement(q1, q2), label_map)
        assert np.all(np.abs(label) <= 1.0)
        if np.all(np.abs(label) < 1.0 - 1e-9):
            estimate = displacement_of(label, label_map)
            assert estimate.q1 == pytest.approx(q1, abs=1e-5)
            assert estimate.q2 == pytest.approx(q2, abs=1e-5)

    def test_out_of_range_output_saturates(self) -> None:
        estimate = displacement_of(np.array([3.0, -3.0]), LabelMap())
        assert math.isfinite(estimate.q1)
        assert estimate.q1 > 10.0
        assert estimate.q2 < -10.0


class TestManifest:
    def test_written_rows_reload_exactly(self, tmp_path: Path) -> None:
        row = ManifestRow(
            index=0,
            q=TendonDisplacement(0.1 + 0.2, -1 / 3),
            label=(math.tanh(0.3), -0.7),
            augmentation=Augmentation(
                gain=0.81, gradient=-0.123, rects=(OcclusionRect(1, 2, 30, 40), OcclusionRect(0, 0, 5, 5))
            ),
            image="images/000000.png",
        )
        Manifest(header={"seed": "7"}, rows=[row]).write(tmp_path)
        loaded = read_manifest(tmp_path)
        assert loaded.header == {"seed": "7"}
        assert loaded.rows == [row]

    def test_missing_manifest(self, tmp_path: Path) -> None:
        with pytest.raises(ResourceNotFoundError):
            read_manifest(tmp_path)

    def test_unknown_format_rejected(self, tmp_path: Path) -> None:
        (tmp_path / MANIFEST_NAME).write_text("# format = other/9\nindex\n", encoding="utf-8")
        with pytest.raises(ValidationError, match="format"):
            read_manifest(tmp_path)

    def test_empty_dataset_rejected(self, tmp_path: Path) -> None:
        Manifest(header={}).write(tmp_path)
        with pytest.raises(ValidationError, match="empty"):
            load_dataset(tmp_path)


class TestSampleRenderer:
    def test_first_spiral_sample_label(self, sample_renderer: SampleRenderer) -> None:
        cfg = SpiralConfig(sample_count=1, amplitude_mm=0.01, periods=1)
        sample = sample_renderer.sample(0, spiral_path(cfg)[0])
        assert sample.image.shape == (16, 16, 3)
        assert sample.label[0] == pytest.approx(0.01, rel=1e-3)
        assert sample.label[1] == pytest.approx(0.0, abs=1e-9)

    def test_sample_depends_only_on_index(self, sample_renderer: SampleRenderer) -> None:
        q = TendonDisplacement(1.5, -0.5)
        first = sample_renderer.sample(4, q)
        sample_renderer.sample(0, q)
        again = sample_renderer.sample(4, q)
        assert first.augmentation == again.augmentation
        assert first.image.tobytes() == again.image.tobytes()


class TestGenerateDataset:
    SPIRAL = SpiralConfig(sample_count=6, amplitude_mm=3.0, periods=1)

    def test_writes_manifest_and_images(self, tmp_path: Path, sample_renderer: SampleRenderer) -> None:
        manifest = generate_dataset(sample_renderer, self.SPIRAL, tmp_path, header={"note": "x"})
        assert len(manifest.rows) == 6
        assert manifest.header["seed"] == "3"
        assert all((tmp_path / row.image).is_file() for row in manifest.rows)
        assert not (tmp_path / ".partial").exists()

        dataset = load_dataset(tmp_path)
        assert len(dataset) == 6
        assert dataset.input_size == (16, 16)
        np.testing.assert_allclose(dataset.labels[0], manifest.rows[0].label)

    def test_parallel_output_is_byte_identical(
        self, tmp_path: Path, sample_renderer: SampleRenderer
    ) -> None:
        generate_dataset(sample_renderer, self.SPIRAL, tmp_path / "serial", workers=1)
        generate_dataset(sample_renderer, self.SPIRAL, tmp_path / "parallel", workers=3)
        serial = sorted((tmp_path / "serial").rglob("*.*"))
        parallel = sorted((tmp_path / "parallel").rglob("*.*"))
        assert [p.relative_to(tmp_path / "serial") for p in serial] == [
            p.relative_to(tmp_path / "parallel") for p in parallel
        ]
        for a, b in zip(serial, parallel, strict=True):
            assert a.read_bytes() == b.read_bytes()

    def test_rerun_replaces_previous_dataset(
        self, tmp_path: Path, sample_renderer: SampleRenderer
    ) -> None:
        generate_dataset(sample_renderer, self.SPIRAL, tmp_path)
        smaller = SpiralConfig(sample_count=2, amplitude_mm=3.0, periods=1)
        generate_dataset(sample_renderer, smaller, tmp_path)
        assert len(read_manifest(tmp_path).rows) == 2
        assert len(list((tmp_path / "images").iterdir())) == 2

    def test_uncovered_home_view_rejected(
        self, tmp_path: Path, sample_renderer: SampleRenderer, texture: np.ndarray
    ) -> None:
        narrow = SampleRenderer(
            scene=PlanarScene(target_texture=texture, plane_halfwidth=0.05),
            intrinsics=sample_renderer.intrinsics,
            geometry=sample_renderer.geometry,
            augmentation=sample_renderer.augmentation,
            label_map=sample_renderer.label_map,
            input_size=(16, 16),
            seed=3,
        )
        with pytest.raises(ValidationError, match="home-pose"):
            generate_dataset(narrow, self.SPIRAL, tmp_path)

    def test_unwritable_output_is_cleaned_up(
        self, tmp_path: Path, sample_renderer: SampleRenderer
    ) -> None:
        blocker = tmp_path / "occupied"
        blocker.write_text("a file, not a directory", encoding="utf-8")
        with pytest.raises(DatasetWriteError):
            generate_dataset(sample_renderer, self.SPIRAL, blocker)
        assert blocker.read_text(encoding="utf-8") == "a file, not a directory"

    @pytest.mark.parametrize("workers", [1, 3])
    def test_render_failure_removes_staging(
        self,
        tmp_path: Path,
        sample_renderer: SampleRenderer,
        monkeypatch: pytest.MonkeyPatch,
        workers: int,
    ) -> None:
        original = SampleRenderer.sample

        def failing(self: SampleRenderer, index: int, q: TendonDisplacement):
            if index == 4:
                raise ValidationError("Pose outside the scene", field="q")
            return original(self, index, q)

        monkeypatch.setattr(SampleRenderer, "sample", failing)
        with pytest.raises(ValidationError, match="outside the scene"):
            generate_dataset(sample_renderer, self.SPIRAL, tmp_path, workers=workers)
        assert not (tmp_path / ".partial").exists()
        assert not (tmp_path / MANIFEST_NAME).exists()

        monkeypatch.undo()
        assert len(generate_dataset(sample_renderer, self.SPIRAL, tmp_path).rows) == 6

    def test_interrupt_removes_staging(
        self, tmp_path: Path, sample_renderer: SampleRenderer, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        def interrupted(*_args: object) -> None:
            raise KeyboardInterrupt

        monkeypatch.setattr("continuum_dvs.dataset.generator.write_png", interrupted)
        with pytest.raises(KeyboardInterrupt):
            generate_dataset(sample_renderer, self.SPIRAL, tmp_path)
        assert not (tmp_path / ".partial").exists()

    def test_statistics(self, tmp_path: Path, sample_renderer: SampleRenderer) -> None:
        stats = sample_statistics(generate_dataset(sample_renderer, self.SPIRAL, tmp_path))
        assert stats["samples"] == 6.0
        assert stats["radius_max_mm"] == pytest.approx(3.0)
        assert -1.0 < stats["label_min"] <= stats["label_max"] < 1.0
