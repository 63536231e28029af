"""Core settings and exception modules.

``continuum_dvs.core.run_config`` is imported directly by callers; it depends on
every pipeline package and is kept out of this namespace.
"""

from continuum_dvs.core.config import Settings
from continuum_dvs.core.exceptions import (
    CheckpointFormatError,
    ConfigurationError,
    DatasetWriteError,
    ProjectBaseError,
    ResourceNotFoundError,
    TrainingDivergedError,
    ValidationError,
)

__all__ = [
    # Exceptions (sorted alphabetically)
    "CheckpointFormatError",
    "ConfigurationError",
    "DatasetWriteError",
    "ProjectBaseError",
    "ResourceNotFoundError",
    # Configuration
    "Settings",
    "TrainingDivergedError",
    "ValidationError",
]
