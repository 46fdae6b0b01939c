"""Runtime configuration for hsdnet."""

from pathlib import Path
from typing import Literal

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide settings loaded from environment variables (prefix ``HSDNET_``)."""

    model_config = SettingsConfigDict(
        env_prefix="HSDNET_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application Info
    APP_NAME: str = "hsdnet"
    APP_VERSION: str = "0.1.0"

    # Parallelism cap for evaluation sharding
    THREADS: int = 1

    # Logging
    LOG_LEVEL: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    LOG_DIR: str = "logs"

    # Latency measurement
    LATENCY_WARMUP: int = 3

    @property
    def log_path(self) -> Path | None:
        """Log file location, or None when file logging is disabled."""
        if not self.LOG_DIR:
            return None
        return Path(self.LOG_DIR) / "hsdnet.log"

    def display(self) -> None:
        """Log the current configuration."""
        from .utils.logger import get_logger

        logger = get_logger(__name__)
        logger.info("=" * 60)
        logger.info(f"{self.APP_NAME} v{self.APP_VERSION}")
        logger.info(f"Threads:      {self.THREADS}")
        logger.info(f"Log level:    {self.LOG_LEVEL}")
        logger.info(f"Log file:     {self.log_path or 'disabled'}")
        logger.info("=" * 60)


# Global settings instance
settings = Settings()
