"""Dataset manifest: a commented header block followed by one CSV row per sample.

Layout (UTF-8, LF line endings, ``.`` decimal separator)::

    # format = continuum-dvs-manifest/1
    # seed = 7
    # spiral_amplitude_mm = 7.0
    ...
    index,q1_mm,q2_mm,label1,label2,gain,gradient,occlusion,image
    0,0.0013999...,...,images/000000.png

Floats are written in shortest round-trip form, so reloading reproduces the exact
values. Occlusion rectangles are ``x0:y0:x1:y1`` joined by ``;``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from continuum_dvs.core.exceptions import ResourceNotFoundError, ValidationError
from continuum_dvs.kinematics import TendonDisplacement
from continuum_dvs.scene import Augmentation, OcclusionRect, read_png

MANIFEST_NAME = "manifest.csv"
MANIFEST_FORMAT = "continuum-dvs-manifest/1"
COLUMNS = ("index", "q1_mm", "q2_mm", "label1", "label2", "gain", "gradient", "occlusion", "image")


@dataclass(frozen=True)
class ManifestRow:
    """One dataset sample as recorded in the manifest."""

    index: int
    q: TendonDisplacement
    label: tuple[float, float]
    augmentation: Augmentation
    image: str

    def to_record(self) -> list[str]:
        """CSV cells in :data:`COLUMNS` order."""
        return [
            str(self.index),
            repr(self.q.q1),
            repr(self.q.q2),
            repr(self.label[0]),
            repr(self.label[1]),
            repr(self.augmentation.gain),
            repr(self.augmentation.gradient),
            self.augmentation.rects_text(),
            self.image,
        ]

    @classmethod
    def from_record(cls, record: dict[str, str]) -> ManifestRow:
        """Parse a CSV record keyed by column name."""
        occlusion = record["occlusion"]
        rects = tuple(OcclusionRect.from_text(part) for part in occlusion.split(";") if part)
        return cls(
            index=int(record["index"]),
            q=TendonDisplacement(float(record["q1_mm"]), float(record["q2_mm"])),
            label=(float(record["label1"]), float(record["label2"])),
            augmentation=Augmentation(
                gain=float(record["gain"]), gradient=float(record["gradient"]), rects=rects
            ),
            image=record["image"],
        )


@dataclass(frozen=True)
class Manifest:
    """Header values and rows of a dataset manifest."""

    header: dict[str, str]
    rows: list[ManifestRow] = field(default_factory=list)

    def to_text(self) -> str:
        """Serialise to the manifest text format."""
        buffer = io.StringIO()
        buffer.write(f"# format = {MANIFEST_FORMAT}\n")
        for key, value in self.header.items():
            buffer.write(f"# {key} = {value}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(COLUMNS)
        writer.writerows(row.to_record() for row in self.rows)
        return buffer.getvalue()

    def write(self, directory: Path) -> Path:
        """Write ``manifest.csv`` into ``directory``."""
        path = directory / MANIFEST_NAME
        path.write_text(self.to_text(), encoding="utf-8", newline="\n")
        return path


def read_manifest(directory: Path | str) -> Manifest:
    """Load the manifest of a dataset directory.

    Args:
        directory (Path | str): Dataset directory.

    Returns:
        Manifest: Header values (without ``format``) and rows.

    Raises:
        ResourceNotFoundError: If ``manifest.csv`` is missing.
        ValidationError: If the file is not a manifest of a supported format.
    """
    path = Path(directory) / MANIFEST_NAME
    if not path.is_file():
        raise ResourceNotFoundError(
            "Dataset manifest not found", resource_type="dataset", path=str(path)
        )
    header: dict[str, str] = {}
    body: list[str] = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            header[key.strip()] = value.strip()
        elif line:
            body.append(line)
    if header.pop("format", None) != MANIFEST_FORMAT:
        raise ValidationError("Unsupported manifest format", field="format", value=str(path))
    rows = [ManifestRow.from_record(record) for record in csv.DictReader(body)]
    return Manifest(header=header, rows=rows)


@dataclass(frozen=True)
class Dataset:
    """In-memory training set.

    Attributes:
        images (NDArray[np.float32]): ``(N, H, W, 3)`` network inputs in [0, 1].
        labels (NDArray[np.float64]): ``(N, 2)`` targets.
        displacements (NDArray[np.float64]): ``(N, 2)`` joint states, millimetres.
    """

    images: NDArray[np.float32]
    labels: NDArray[np.float64]
    displacements: NDArray[np.float64]

    def __len__(self) -> int:
        return int(self.images.shape[0])

    @property
    def input_size(self) -> tuple[int, int]:
        """``(height, width)`` of the stored images."""
        return int(self.images.shape[1]), int(self.images.shape[2])


def load_dataset(directory: Path | str) -> Dataset:
    """Read every image and label of a generated dataset.

    Args:
        directory (Path | str): Dataset directory containing ``manifest.csv``.

    Returns:
        Dataset: Images, labels and displacements in manifest order.

    Raises:
        ValidationError: If the manifest lists no samples.
    """
    root = Path(directory)
    manifest = read_manifest(root)
    if not manifest.rows:
        raise ValidationError("Dataset is empty", field="dataset", value=str(root))
    images = np.stack([read_png(root / row.image) for row in manifest.rows]).astype(np.float32)
    labels = np.array([row.label for row in manifest.rows], dtype=np.float64)
    displacements = np.array([(row.q.q1, row.q.q2) for row in manifest.rows], dtype=np.float64)
    return Dataset(images=images, labels=labels, displacements=displacements)
