"""Spiral-path dataset generation, labels and manifests."""

from continuum_dvs.dataset.generator import (
    DatasetSample,
    SampleRenderer,
    generate_dataset,
    sample_statistics,
)
from continuum_dvs.dataset.labels import LabelMap, displacement_of, label_of
from continuum_dvs.dataset.manifest import (
    MANIFEST_NAME,
    Dataset,
    Manifest,
    ManifestRow,
    load_dataset,
    read_manifest,
)
from continuum_dvs.dataset.spiral import SpiralConfig, spiral_path, spiral_point

__all__ = [
    "MANIFEST_NAME",
    "Dataset",
    "DatasetSample",
    "LabelMap",
    "Manifest",
    "ManifestRow",
    "SampleRenderer",
    "SpiralConfig",
    "displacement_of",
    "generate_dataset",
    "label_of",
    "load_dataset",
    "read_manifest",
    "sample_statistics",
    "spiral_path",
    "spiral_point",
]
