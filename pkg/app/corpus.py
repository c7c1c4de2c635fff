"""Shared-task TSV ingestion, dataset statistics and train/dev splitting."""
import json
import logging
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from app.errors import DataError

logger = logging.getLogger("tweetinfo.corpus")

HEADER_FIELDS = ("Id", "Text", "Label")


class Label(str, Enum):
    INFORMATIVE = "INFORMATIVE"
    UNINFORMATIVE = "UNINFORMATIVE"

    @classmethod
    def parse(cls, value: str) -> "Label":
        """Parse a label case-insensitively."""
        normalized = value.strip().upper()
        try:
            return cls(normalized)
        except ValueError:
            raise DataError(
                f"Invalid label: {value!r}. Must be one of: "
                f"{', '.join(label.value for label in cls)}"
            ) from None

    @property
    def positive(self) -> bool:
        return self is Label.INFORMATIVE


class Tweet(BaseModel):
    """One shared-task record."""

    model_config = ConfigDict(frozen=True)

    id: str = Field(..., min_length=1, description="Opaque tweet id")
    text: str = Field(..., min_length=1, description="Raw tweet text")
    label: Optional[Label] = Field(None, description="Gold label, absent for test data")


class Dataset(BaseModel):
    """An ordered, named collection of tweets with unique ids."""

    model_config = ConfigDict(frozen=True)

    name: str = "dataset"
    tweets: Tuple[Tweet, ...] = ()

    @model_validator(mode="after")
    def _unique_ids(self) -> "Dataset":
        seen = set()
        for tweet in self.tweets:
            if tweet.id in seen:
                raise DataError(f"Duplicate tweet id {tweet.id!r} in {self.name}")
            seen.add(tweet.id)
        return self

    def __len__(self) -> int:
        return len(self.tweets)

    def __iter__(self):
        return iter(self.tweets)

    @property
    def texts(self) -> List[str]:
        return [t.text for t in self.tweets]

    @property
    def labels(self) -> List[Label]:
        labels = []
        for t in self.tweets:
            if t.label is None:
                raise DataError(f"Tweet {t.id!r} in {self.name} has no label")
            labels.append(t.label)
        return labels

    def subset(self, indices, name: Optional[str] = None) -> "Dataset":
        return Dataset(name=name or self.name, tweets=tuple(self.tweets[i] for i in indices))

    def with_texts(self, texts: List[str], name: Optional[str] = None) -> "Dataset":
        """Same ids and labels, replaced texts (e.g. after preprocessing)."""
        if len(texts) != len(self.tweets):
            raise DataError("Text count does not match dataset size")
        return Dataset(
            name=name or self.name,
            tweets=tuple(
                Tweet(id=t.id, text=text if text else " ", label=t.label)
                for t, text in zip(self.tweets, texts)
            ),
        )


class CorpusStats(BaseModel):
    """Class counts and whitespace word-count statistics."""

    count_informative: int = Field(..., ge=0)
    count_uninformative: int = Field(..., ge=0)
    wc_max: int
    wc_min: int
    wc_avg: float = Field(..., description="Average words per tweet, 3 decimals")

    @model_validator(mode="after")
    def _ordered(self) -> "CorpusStats":
        if not self.wc_min <= self.wc_avg <= self.wc_max:
            raise DataError("Word count statistics must satisfy min <= avg <= max")
        return self

    def to_json(self) -> str:
        return json.dumps(self.model_dump(), indent=2, sort_keys=True)


def load_tsv(
    path: Union[str, Path], *, labeled: bool = True, name: Optional[str] = None
) -> Dataset:
    """
    Read an official shared-task TSV file.

    Layout is `Id<TAB>Text<TAB>Label` with one header line; unlabeled
    (test) files carry only `Id<TAB>Text`.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"Missing dataset file: {path}")

    expected = 3 if labeled else 2
    tweets: List[Tweet] = []
    with path.open("r", encoding="utf-8", newline="") as handle:
        header = handle.readline()
        if not header:
            raise DataError(f"{path} is empty; a header line is required")
        for lineno, raw_line in enumerate(handle, start=2):
            line = raw_line.rstrip("\r\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != expected:
                raise DataError(
                    f"expected {expected} tab-separated fields, found {len(fields)}",
                    line=lineno,
                )
            tweet_id, text = fields[0], fields[1]
            if not tweet_id or not text.strip():
                raise DataError("empty id or text", line=lineno)
            try:
                label = Label.parse(fields[2]) if labeled else None
            except DataError as exc:
                raise DataError(str(exc), line=lineno) from None
            tweets.append(Tweet(id=tweet_id, text=text, label=label))

    try:
        dataset = Dataset(name=name or path.stem, tweets=tuple(tweets))
    except ValidationError as exc:
        raise DataError(f"{path}: {exc.errors()[0]['msg']}") from None
    logger.info("Loaded %s: %d tweets from %s", dataset.name, len(dataset), path)
    return dataset


def write_tsv(dataset: Dataset, path: Union[str, Path]) -> None:
    """Write a dataset in the official layout (used for preprocessing dumps)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write("\t".join(HEADER_FIELDS) + "\n")
        for t in dataset:
            label = t.label.value if t.label else ""
            handle.write(f"{t.id}\t{t.text}\t{label}\n")


def class_counts(dataset: Dataset) -> Tuple[int, int]:
    """Return (informative, uninformative) counts."""
    labels = dataset.labels
    informative = sum(1 for label in labels if label is Label.INFORMATIVE)
    return informative, len(labels) - informative


def word_count(text: str) -> int:
    return len(text.split())


def word_count_stats(dataset: Dataset) -> CorpusStats:
    """
    Class counts plus whitespace word-count max, min and 3-decimal average.

    Raises:
        DataError: empty dataset or an unlabeled tweet.
    """
    if len(dataset) == 0:
        raise DataError(f"Cannot compute word counts of empty dataset {dataset.name}")
    counts = [word_count(t.text) for t in dataset]
    informative, uninformative = class_counts(dataset)
    wc_min, wc_max = min(counts), max(counts)
    # rounding can push the average past a bound when all counts are equal
    wc_avg = min(max(round(sum(counts) / len(counts), 3), wc_min), wc_max)
    return CorpusStats(
        count_informative=informative,
        count_uninformative=uninformative,
        wc_max=wc_max,
        wc_min=wc_min,
        wc_avg=wc_avg,
    )


def split_train_dev(dataset: Dataset, seed: int) -> Tuple[Dataset, Dataset]:
    """
    Carve a dev split out of the training data.

    Uniform random permutation (not stratified) fully determined by
    `seed`; the train part gets ceil(0.9 * n) tweets.
    """
    n = len(dataset)
    if n < 10:
        raise DataError(f"Dataset {dataset.name} has {n} tweets; at least 10 are needed to split")
    n_train = (9 * n + 9) // 10  # ceil(0.9 n) without float rounding
    order = np.random.default_rng(seed).permutation(n)
    train = dataset.subset(order[:n_train].tolist(), name=f"{dataset.name}-train")
    dev = dataset.subset(order[n_train:].tolist(), name=f"{dataset.name}-dev")
    return train, dev
