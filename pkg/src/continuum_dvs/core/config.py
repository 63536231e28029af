"""Process settings for Continuum DVS.

Settings are loaded from environment variables with the prefix 'CONTINUUM_DVS_'
(or a local ``.env`` file). Pydantic-settings handles the parsing and validation.
Per-run experiment parameters live in :mod:`continuum_dvs.core.run_config`.
"""

from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide settings, loaded from environment variables.

    Attributes:
        model_config (SettingsConfigDict): Pydantic-settings model configuration
            (env prefix, .env file, case sensitivity, extra field policy).
        log_level (Literal['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']): The
            logging level for the application.
        json_logs (bool): Flag to enable or disable JSON formatted logs.
        include_timestamp (bool): Flag to include timestamps in logs.
        workers (int): Default worker threads for dataset generation and sweeps.
    """

    model_config: SettingsConfigDict = SettingsConfigDict(
        env_prefix="continuum_dvs_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "INFO"
    json_logs: bool = False
    include_timestamp: bool = True
    workers: int = Field(default=1, ge=1)


# A single, global instance of the settings
settings = Settings()
