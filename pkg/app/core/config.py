from typing import Optional
from pydantic_settings import BaseSettings, SettingsConfigDict


class Config(BaseSettings):
    HOST: str = "0.0.0.0"
    PORT: int = 8000
    RELOAD: bool = False

    DEFAULT_SEED: int = 0
    CSV_DELIMITER: str = ","
    MAX_UPLOAD_VECTOR: int = 1_000_000
    DATA_ROOT: str = "data"

    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "console"
    LOG_DIR: str = "logs"
    LOG_FILE_APP: str = "app.log"
    LOG_FILE_RUN: str = "runs.log"
    LOG_TO_FILE: bool = False

    ENVIRONMENT: str = "development"

    SENTRY_DSN: Optional[str] = None
    SENTRY_TRACES_SAMPLE_RATE: float = 0.1

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
    )


config = Config()
