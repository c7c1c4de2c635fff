"""Configuration settings for tweetinfo."""
import os
from functools import lru_cache
from pathlib import Path

PACKAGE_DIR = Path(__file__).resolve().parent


class Settings:
    """Application settings loaded from environment."""

    # Data locations
    DATA_DIR: Path = Path(os.environ.get("TWEETINFO_DATA_DIR", "data"))
    RUNS_DIR: Path = Path(os.environ.get("TWEETINFO_RUNS_DIR", "runs"))
    LEXICON_DIR: Path = Path(
        os.environ.get("TWEETINFO_LEXICON_DIR", str(PACKAGE_DIR / "data" / "lexicons"))
    )

    # Official shared-task file names inside DATA_DIR
    TRAIN_FILE: str = "train.tsv"
    VALID_FILE: str = "valid.tsv"

    # "file" = shipped emoji.tsv only, "package" = also the emoji package table
    EMOJI_SOURCE: str = os.environ.get("TWEETINFO_EMOJI_SOURCE", "file")

    # Experiments seed everything with 0
    SEED: int = int(os.environ.get("TWEETINFO_SEED", "0"))

    LOG_LEVEL: str = os.environ.get("TWEETINFO_LOG_LEVEL", "INFO")

    # Service info
    SERVICE_NAME: str = "tweetinfo"
    VERSION: str = "0.1.0"

    # Prediction API
    MODEL_PATH: str = os.environ.get("TWEETINFO_MODEL_PATH", "")
    MAX_BATCH: int = int(os.environ.get("TWEETINFO_MAX_BATCH", "1000"))
    MAX_TEXT_LENGTH: int = int(os.environ.get("TWEETINFO_MAX_TEXT_LENGTH", "10000"))

    @property
    def train_path(self) -> Path:
        return self.DATA_DIR / self.TRAIN_FILE

    @property
    def valid_path(self) -> Path:
        return self.DATA_DIR / self.VALID_FILE


@lru_cache
def get_settings() -> Settings:
    return Settings()


settings = get_settings()
