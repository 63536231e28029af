"""Utility modules for logging, run correlation and seeded randomness."""

from continuum_dvs.utils.logging import get_logger, log_performance, setup_logging
from continuum_dvs.utils.run_context import bind_run_context, get_run_id
from continuum_dvs.utils.seeding import derive_rng

__all__ = [
    "bind_run_context",
    "derive_rng",
    "get_logger",
    "get_run_id",
    "log_performance",
    "setup_logging",
]
