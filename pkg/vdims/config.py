import logging
from functools import lru_cache
from pathlib import Path

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # Runtime
    environment: str = "development"
    debug: bool = False
    log_level: str = "INFO"

    # Result cache
    cache_dir: str = ".vdims-cache"
    cache_enabled: bool = True

    # Prime set for rank consensus - comma-separated string that gets parsed to list
    primes: str = "1000000007,998244353"

    # Degree limits
    default_max_degree: int = 4
    heavy_degree: int = 5  # first degree that is opt-in (about an hour per cell)
    allow_heavy: bool = False
    max_degree_limit: int = 6  # soft limit, nothing above this is scheduled

    # Scheduling
    case_time_budget_seconds: float = 3600  # per (case, n, space) job
    workers: int = 1

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"

    @property
    def primes_list(self) -> list[int]:
        """Parse the prime set from a comma-separated string to a list."""
        return [int(p.strip()) for p in self.primes.split(",") if p.strip()]

    @property
    def cache_path(self) -> Path:
        """Cache directory as a Path."""
        return Path(self.cache_dir)


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


def configure_logging(settings: Settings | None = None) -> None:
    """Apply the configured log level to the root logger."""
    settings = settings or get_settings()
    level = logging.DEBUG if settings.debug else getattr(logging, settings.log_level.upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s [%(name)s] %(message)s",
    )
    logging.getLogger().setLevel(level)
