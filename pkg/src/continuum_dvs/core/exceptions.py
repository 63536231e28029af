"""Centralized exception hierarchy for Continuum DVS.

This module provides a structured exception hierarchy for consistent error handling
across the toolkit. All project-specific exceptions inherit from ProjectBaseError
and carry the process exit code the CLI reports for them.

Exception Hierarchy:
    ProjectBaseError (base for all project exceptions)
    ├── ConfigurationError (run configuration / settings issues)
    ├── ValidationError (rejected input: bad pose, shape or image)
    ├── ResourceNotFoundError (missing texture, dataset, checkpoint)
    ├── CheckpointFormatError (unreadable or mismatched parameter file)
    ├── DatasetWriteError (I/O failure while writing a dataset)
    └── TrainingDivergedError (non-finite gradient or loss)

Usage:
    from continuum_dvs.core.exceptions import ValidationError

    raise ValidationError("Rotation is not orthonormal", field="rotation")
"""

from __future__ import annotations

from typing import Any, ClassVar

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_NOT_CONVERGED = 3


class ProjectBaseError(Exception):
    """Base exception for all Continuum DVS errors.

    Args:
        message (str): Human-readable error description.
        details (dict[str, Any] | None): Additional context as key-value pairs.
        error_code (str | None): Machine-readable error code.

    Example:
        >>> raise ProjectBaseError("Something went wrong", error_code="ERR001")
    """

    exit_code: ClassVar[int] = EXIT_RUNTIME

    def __init__(
        self,
        message: str,
        *,
        details: dict[str, Any] | None = None,
        error_code: str | None = None,
    ) -> None:
        super().__init__(message)
        self.message = message
        self.details = details or {}
        self.error_code = error_code

    def to_dict(self) -> dict[str, Any]:
        """Convert exception to a dictionary for structured CLI output.

        Returns:
            dict[str, Any]: Error details suitable for JSON serialization.
        """
        result: dict[str, Any] = {
            "error": self.__class__.__name__,
            "message": self.message,
        }
        if self.error_code:
            result["code"] = self.error_code
        if self.details:
            result["details"] = self.details
        return result


class ConfigurationError(ProjectBaseError):
    """Run configuration errors.

    Raised when a config file cannot be parsed, names an unknown key or holds a
    value of the wrong form. The offending key is always named in ``details``.

    Args:
        message (str): Description of the problem.
        key (str | None): The configuration key at fault.
        expected (str | None): Human-readable description of the accepted form.
        details (dict[str, Any] | None): Additional context.
        error_code (str | None): Machine-readable error code.

    Example:
        >>> raise ConfigurationError(
        ...     "Unknown key", key="spiral_amplitud_mm", expected="a documented key"
        ... )
    """

    exit_code: ClassVar[int] = EXIT_USAGE

    def __init__(
        self,
        message: str,
        *,
        key: str | None = None,
        expected: str | None = None,
        details: dict[str, Any] | None = None,
        error_code: str | None = None,
    ) -> None:
        details = details or {}
        if key:
            details["key"] = key
        if expected:
            details["expected"] = expected
        super().__init__(
            message, details=details, error_code=error_code or "CONFIG_ERROR"
        )


class ValidationError(ProjectBaseError):
    """Rejected input.

    Raised for degenerate poses, tensor shape mismatches, constant images and
    other inputs outside an operation's precondition.

    Args:
        message (str): Description of the validation failure.
        field (str | None): Name of the argument that failed validation.
        value (Any): The invalid value (truncated in details).
        details (dict[str, Any] | None): Additional validation context.
        error_code (str | None): Machine-readable error code.
    """

    def __init__(
        self,
        message: str,
        *,
        field: str | None = None,
        value: Any = None,
        details: dict[str, Any] | None = None,
        error_code: str | None = None,
    ) -> None:
        details = details or {}
        if field:
            details["field"] = field
        if value is not None:
            # Truncate long values to avoid log bloat
            str_value = str(value)
            details["value"] = (
                str_value[:100] + "..." if len(str_value) > 100 else str_value
            )
        super().__init__(
            message, details=details, error_code=error_code or "VALIDATION_ERROR"
        )


class ResourceNotFoundError(ProjectBaseError):
    """A required file or directory does not exist.

    Args:
        message (str): Description of what was not found.
        resource_type (str | None): Kind of resource (e.g., "texture", "dataset").
        path (str | None): Path that was looked up.
        details (dict[str, Any] | None): Additional context.
        error_code (str | None): Machine-readable error code.

    Example:
        >>> raise ResourceNotFoundError(
        ...     "Dataset manifest not found",
        ...     resource_type="dataset",
        ...     path="runs/data/manifest.csv",
        ... )
    """

    exit_code: ClassVar[int] = EXIT_USAGE

    def __init__(
        self,
        message: str,
        *,
        resource_type: str | None = None,
        path: str | None = None,
        details: dict[str, Any] | None = None,
        error_code: str | None = None,
    ) -> None:
        details = details or {}
        if resource_type:
            details["resource_type"] = resource_type
        if path:
            details["path"] = path
        super().__init__(message, details=details, error_code=error_code or "NOT_FOUND")


class CheckpointFormatError(ProjectBaseError):
    """Parameter checkpoint cannot be used.

    Raised on bad magic, unsupported version, truncation, or when the stored
    shapes do not match the network layout.

    Args:
        message (str): Description of the problem.
        layer (int | None): Index of the first mismatched layer, when known.
        details (dict[str, Any] | None): Additional context.
        error_code (str | None): Machine-readable error code.
    """

    def __init__(
        self,
        message: str,
        *,
        layer: int | None = None,
        details: dict[str, Any] | None = None,
        error_code: str | None = None,
    ) -> None:
        details = details or {}
        if layer is not None:
            details["layer"] = layer
        super().__init__(
            message, details=details, error_code=error_code or "CHECKPOINT_FORMAT"
        )


class DatasetWriteError(ProjectBaseError):
    """Dataset generation failed while writing output; partial output removed."""

    def __init__(
        self,
        message: str,
        *,
        path: str | None = None,
        details: dict[str, Any] | None = None,
        error_code: str | None = None,
    ) -> None:
        details = details or {}
        if path:
            details["path"] = path
        super().__init__(
            message, details=details, error_code=error_code or "DATASET_WRITE"
        )


class TrainingDivergedError(ProjectBaseError):
    """Non-finite gradient or loss during optimisation.

    Args:
        message (str): Description of the failure.
        last_good_epoch (int | None): Last epoch whose parameters were finite
            (0 means the initial parameters).
        details (dict[str, Any] | None): Additional context.
        error_code (str | None): Machine-readable error code.
    """

    def __init__(
        self,
        message: str,
        *,
        last_good_epoch: int | None = None,
        details: dict[str, Any] | None = None,
        error_code: str | None = None,
    ) -> None:
        details = details or {}
        if last_good_epoch is not None:
            details["last_good_epoch"] = last_good_epoch
        self.last_good_epoch = last_good_epoch
        super().__init__(
            message, details=details, error_code=error_code or "TRAINING_DIVERGED"
        )


# Export all exceptions
__all__ = [
    "EXIT_NOT_CONVERGED",
    "EXIT_OK",
    "EXIT_RUNTIME",
    "EXIT_USAGE",
    "CheckpointFormatError",
    "ConfigurationError",
    "DatasetWriteError",
    "ProjectBaseError",
    "ResourceNotFoundError",
    "TrainingDivergedError",
    "ValidationError",
]
