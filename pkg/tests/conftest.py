"""Shared fixtures: shipped lexicons, small labeled corpora and TSV files."""
from pathlib import Path

import pytest

from app.config import settings
from app.corpus import Dataset, Label, Tweet, write_tsv
from app.preprocess import load_lexicons
from app.synthetic import make_synthetic_corpus, synthetic_splits


@pytest.fixture(scope="session")
def lexicons():
    return load_lexicons(emoji_source="file")


@pytest.fixture(scope="session")
def tiny_dataset():
    tweets = [
        ("t1", "Ohio reports 120 new confirmed cases", Label.INFORMATIVE),
        ("t2", "stay home and stay safe everyone", Label.UNINFORMATIVE),
        ("t3", "Italy confirms 45 deaths from covid today", Label.INFORMATIVE),
        ("t4", "I can't believe this year honestly", Label.UNINFORMATIVE),
        ("t5", "Brazil now has 300 confirmed cases", Label.INFORMATIVE),
        ("t6", "wash your hands and pray for everyone", Label.UNINFORMATIVE),
    ]
    return Dataset(
        name="tiny",
        tweets=tuple(Tweet(id=i, text=text, label=label) for i, text, label in tweets),
    )


@pytest.fixture(scope="session")
def synthetic_corpus():
    return make_synthetic_corpus(n=400, seed=0, name="synthetic")


@pytest.fixture(scope="session")
def synthetic_data():
    """(train, valid) synthetic splits sized for quick training runs."""
    return synthetic_splits(seed=0, n_train=300, n_valid=80)


@pytest.fixture()
def write_dataset(tmp_path):
    """Write a Dataset to a TSV inside tmp_path and return the path."""

    def _write(dataset: Dataset, name: str = "data.tsv") -> Path:
        path = tmp_path / name
        write_tsv(dataset, path)
        return path

    return _write


@pytest.fixture()
def isolated_settings(monkeypatch, tmp_path):
    """Point data and run directories at an empty tmp_path."""
    data_dir = tmp_path / "data"
    data_dir.mkdir()
    monkeypatch.setattr(settings, "DATA_DIR", data_dir, raising=False)
    monkeypatch.setattr(settings, "RUNS_DIR", tmp_path / "runs", raising=False)
    return settings


official_data = pytest.mark.skipif(
    not (settings.train_path.exists() and settings.valid_path.exists()),
    reason="official shared-task TSV files not found in TWEETINFO_DATA_DIR",
)
