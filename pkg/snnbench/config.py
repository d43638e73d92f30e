"""
snnbench - Configuration Management
Centralized configuration with validation using Pydantic.
"""

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()


class DatabaseConfig(BaseSettings):
    """Results ledger settings."""

    model_config = SettingsConfigDict(env_prefix="SNNBENCH_DATABASE_")

    url: str = "sqlite:///snnbench.db"
    echo: bool = False


class DataConfig(BaseSettings):
    """MNIST location and download settings."""

    model_config = SettingsConfigDict(env_prefix="SNNBENCH_DATA_")

    dir: str = "mnist"
    eval_size: int = Field(default=10000, ge=0)
    mirror_url: str = "https://storage.googleapis.com/cvdf-datasets/mnist"
    timeout: int = Field(default=30, gt=0)
    max_retries: int = Field(default=3, ge=0)


class LoggingConfig(BaseSettings):
    """Logging configuration settings."""

    model_config = SettingsConfigDict(env_prefix="SNNBENCH_LOG_")

    level: str = "INFO"
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class RuntimeConfig(BaseSettings):
    """Execution settings shared by the simulator and the harness."""

    model_config = SettingsConfigDict(env_prefix="SNNBENCH_")

    workers: int = Field(default=1, ge=1)
    chunk_size: int = Field(default=256, ge=1)
    results_dir: str = "results"
    cache_dir: str = ".snnbench_cache"


class Config:
    """Main configuration class."""

    def __init__(self):
        self.database = DatabaseConfig()
        self.data = DataConfig()
        self.logging = LoggingConfig()
        self.runtime = RuntimeConfig()


# Global configuration instance
config = Config()
