"""Run context propagation for log correlation.

Every CLI command runs inside :func:`bind_run_context`, which stores a run ID,
the command name and the top-level seed in context variables. The structlog
processor :func:`run_context_processor` copies them into each log event so that
logs from dataset generation, training and servo runs can be correlated with the
artifacts written to the output directory.

Usage:
    from continuum_dvs.utils.run_context import bind_run_context

    with bind_run_context("servo", seed=7) as run_id:
        logger.info("Servo started")  # carries run_id, command, seed
"""

from __future__ import annotations

import uuid
from contextlib import contextmanager
from contextvars import ContextVar
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Iterator

    from structlog.types import EventDict, WrappedLogger

# Context variables for run correlation (thread/async-safe)
_run_id_ctx: ContextVar[str | None] = ContextVar("run_id", default=None)
_command_ctx: ContextVar[str | None] = ContextVar("command", default=None)
_seed_ctx: ContextVar[int | None] = ContextVar("seed", default=None)


def get_run_id() -> str | None:
    """Get the active run ID.

    Returns:
        str | None: Run ID string or None outside a run context.
    """
    return _run_id_ctx.get()


def generate_run_id() -> str:
    """Generate a new run ID.

    Returns:
        str: A new UUID4 string.
    """
    return str(uuid.uuid4())


@contextmanager
def bind_run_context(
    command: str,
    *,
    seed: int | None = None,
    run_id: str | None = None,
) -> Iterator[str]:
    """Bind run correlation values for the duration of a block.

    Args:
        command (str): Name of the CLI command being executed.
        seed (int | None): Top-level seed of the run, if any.
        run_id (str | None): Explicit run ID; a UUID4 is generated when omitted.

    Yields:
        str: The active run ID.
    """
    active_id = run_id or generate_run_id()
    run_token = _run_id_ctx.set(active_id)
    command_token = _command_ctx.set(command)
    seed_token = _seed_ctx.set(seed)
    try:
        yield active_id
    finally:
        _run_id_ctx.reset(run_token)
        _command_ctx.reset(command_token)
        _seed_ctx.reset(seed_token)


def run_context_processor(
    _logger: WrappedLogger,
    _method_name: str,
    event_dict: EventDict,
) -> EventDict:
    """Structlog processor adding run correlation values to log entries.

    Args:
        _logger (WrappedLogger): The wrapped logger instance (unused).
        _method_name (str): The name of the log method called (unused).
        event_dict (EventDict): The event dictionary to process.

    Returns:
        EventDict: Updated event dictionary with run context.
    """
    run_id = _run_id_ctx.get()
    command = _command_ctx.get()
    seed = _seed_ctx.get()

    if run_id:
        event_dict["run_id"] = run_id
    if command:
        event_dict["command"] = command
    if seed is not None:
        event_dict["seed"] = seed

    return event_dict


__all__ = [
    "bind_run_context",
    "generate_run_id",
    "get_run_id",
    "run_context_processor",
]
