import logging
import os
from typing import Literal

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    algorithm: Literal["brute", "kmp", "bm", "ac"] = "ac"
    workers: int = 0  # 0 means one worker per available CPU
    chunk_size: int = 1024 * 1024
    executor: Literal["process", "thread"] = "process"
    signatures: str = "paper"  # paper, canonical, or a path to a signature config file
    output_dir: str = "carved"
    manifest_name: str = "manifest.jsonl"
    max_file_size: int = 10 * 1024 * 1024  # Applied to every built-in signature
    validation_window: int = 64  # Leading bytes handed to deep validators
    sanitize_rounds: int = 64
    api_host: str = "127.0.0.1"
    api_port: int = 8000

    class Config:
        env_prefix = "PARCARVE_"


settings = Settings()


def default_workers() -> int:
    """Resolve the configured worker count, 0 meaning hardware parallelism."""
    if settings.workers > 0:
        return settings.workers
    return os.cpu_count() or 1


def setup_logging() -> None:
    """Configure logging for the application."""
    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )
