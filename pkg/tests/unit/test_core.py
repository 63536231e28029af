"""Exceptions, process settings, logging setup and seed fan-out."""

from __future__ import annotations

import io
import json
import logging
import zlib
from collections.abc import Iterator
from pathlib import Path

import numpy as np
import pydantic
import pytest
import structlog

from continuum_dvs.core.config import Settings
from continuum_dvs.core.exceptions import (
    EXIT_NOT_CONVERGED,
    CheckpointFormatError,
    ConfigurationError,
    DatasetWriteError,
    ProjectBaseError,
    ResourceNotFoundError,
    TrainingDivergedError,
    ValidationError,
)
from continuum_dvs.utils.logging import get_logger, log_performance, setup_logging
from continuum_dvs.utils.run_context import bind_run_context, get_run_id, run_context_processor
from continuum_dvs.utils.seeding import TAG_DATASET, TAG_SHUFFLE, derive_rng, tag_value

pytestmark = pytest.mark.unit


class TestExceptions:
    def test_to_dict_shape(self) -> None:
        error = ResourceNotFoundError("Texture not found", resource_type="texture", path="t.png")
        assert error.to_dict() == {
            "error": "ResourceNotFoundError",
            "message": "Texture not found",
            "code": "NOT_FOUND",
            "details": {"resource_type": "texture", "path": "t.png"},
        }

    def test_empty_details_omitted(self) -> None:
        assert ProjectBaseError("boom").to_dict() == {"error": "ProjectBaseError", "message": "boom"}

    @pytest.mark.parametrize(
        ("error", "exit_code", "code"),
        [
            (ConfigurationError("x", key="seed"), 1, "CONFIG_ERROR"),
            (ResourceNotFoundError("x"), 1, "NOT_FOUND"),
            (ValidationError("x"), 2, "VALIDATION_ERROR"),
            (CheckpointFormatError("x", layer=3), 2, "CHECKPOINT_FORMAT"),
            (DatasetWriteError("x", path="/d"), 2, "DATASET_WRITE"),
            (TrainingDivergedError("x", last_good_epoch=4), 2, "TRAINING_DIVERGED"),
        ],
    )
    def test_exit_codes_and_error_codes(
        self, error: ProjectBaseError, exit_code: int, code: str
    ) -> None:
        assert error.exit_code == exit_code
        assert error.error_code == code
        assert EXIT_NOT_CONVERGED == 3

    def test_long_values_truncated(self) -> None:
        error = ValidationError("bad", field="image", value="x" * 250)
        assert error.details["value"] == "x" * 100 + "..."

    def test_structured_fields(self) -> None:
        assert CheckpointFormatError("x", layer=0).details == {"layer": 0}
        diverged = TrainingDivergedError("x", last_good_epoch=0)
        assert diverged.last_good_epoch == 0
        assert diverged.details == {"last_good_epoch": 0}


class TestSettings:
    def test_environment_prefix(self, monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
        monkeypatch.chdir(tmp_path)
        monkeypatch.setenv("CONTINUUM_DVS_LOG_LEVEL", "DEBUG")
        monkeypatch.setenv("CONTINUUM_DVS_WORKERS", "4")
        settings = Settings()
        assert settings.log_level == "DEBUG"
        assert settings.workers == 4
        assert settings.json_logs is False

    def test_invalid_worker_count(self, monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
        monkeypatch.chdir(tmp_path)
        monkeypatch.setenv("CONTINUUM_DVS_WORKERS", "0")
        with pytest.raises(pydantic.ValidationError):
            Settings()


@pytest.fixture
def json_log_stream() -> Iterator[io.StringIO]:
    """JSON log lines from :func:`setup_logging`, written to an in-memory stream."""
    stream = io.StringIO()
    setup_logging(level="INFO", json_logs=True, include_timestamp=False)
    handler = logging.getLogger().handlers[0]
    assert isinstance(handler, logging.StreamHandler)
    handler.setStream(stream)
    yield stream
    structlog.reset_defaults()
    logging.basicConfig(handlers=[logging.NullHandler()], force=True)


def _last_event(stream: io.StringIO) -> dict[str, object]:
    return json.loads(stream.getvalue().strip().splitlines()[-1])


class TestLogging:
    def test_json_events_carry_run_context(self, json_log_stream: io.StringIO) -> None:
        logger = get_logger("continuum_dvs.test")
        with bind_run_context("train", seed=5, run_id="run-1"):
            logger.info("Epoch finished", epoch=1)
        event = _last_event(json_log_stream)
        assert event["event"] == "Epoch finished"
        assert event["epoch"] == 1
        assert event["run_id"] == "run-1"
        assert event["command"] == "train"
        assert event["seed"] == 5
        assert event["level"] == "info"
        assert event["logger"] == "continuum_dvs.test"
        assert "timestamp" not in event

    def test_log_performance(self, json_log_stream: io.StringIO) -> None:
        log_performance(get_logger("continuum_dvs.test"), "render", 12.3456, width_px=80)
        event = _last_event(json_log_stream)
        assert event["operation"] == "render"
        assert event["duration_ms"] == 12.35
        assert event["success"] is True
        assert event["width_px"] == 80

    def test_below_level_is_dropped(self, json_log_stream: io.StringIO) -> None:
        get_logger("continuum_dvs.test").debug("Batch done")
        assert json_log_stream.getvalue() == ""

    def test_context_is_scoped(self) -> None:
        assert get_run_id() is None
        with bind_run_context("eval") as run_id:
            assert get_run_id() == run_id
            event = run_context_processor(None, "info", {"event": "x"})
            assert event == {"event": "x", "run_id": run_id, "command": "eval"}
        assert get_run_id() is None
        assert run_context_processor(None, "info", {"event": "x"}) == {"event": "x"}


class TestSeeding:
    def test_same_triple_same_stream(self) -> None:
        a = derive_rng(7, TAG_DATASET, 3).random(8)
        b = derive_rng(7, TAG_DATASET, 3).random(8)
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize(
        "other",
        [(8, TAG_DATASET, 3), (7, TAG_SHUFFLE, 3), (7, TAG_DATASET, 4)],
    )
    def test_any_component_changes_stream(self, other: tuple[int, str, int]) -> None:
        base = derive_rng(7, TAG_DATASET, 3).random(8)
        assert not np.array_equal(base, derive_rng(*other).random(8))

    def test_tag_value_is_crc32(self) -> None:
        assert tag_value("dataset") == zlib.crc32(b"dataset")
