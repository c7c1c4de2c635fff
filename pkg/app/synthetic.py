"""
Seeded, templated mini-corpus used when the official files are absent.

Informative tweets report case counts for a place; uninformative ones
are opinions, advice or jokes. Both draw emoji, URLs, contractions and
non-ASCII characters so every cleaning step has work to do.
"""
import logging
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from app.corpus import Dataset, Label, Tweet, write_tsv

logger = logging.getLogger("tweetinfo.synthetic")

PLACES = (
    "Ohio", "Lombardy", "New York", "Madrid", "Tokyo", "São Paulo", "Delhi",
    "Ontario", "Bavaria", "Lagos", "Queensland", "Wuhan", "Seoul", "Île-de-France",
)
CASE_KINDS = ("confirmed cases", "suspected cases", "recoveries", "deaths", "new infections")
INFORMATIVE_TEMPLATES = (
    "{place} reports {n} new {kind} today, total now {m} {emoji} {url}",
    "BREAKING: {n} {kind} confirmed in {place}, officials say {url}",
    "Update {emoji} {place}: {n} {kind} and {k} patients in ICU as of this morning",
    "{place} health ministry: {kind} rose by {n} to {m}. {url}",
    "There're {n} {kind} in {place} now, {k} of them linked to travel {emoji}",
    "Official: {place} records {n} {kind}; {k} deaths reported {url} {emoji}",
)
UNINFORMATIVE_TEMPLATES = (
    "I can't believe people still won't wear masks {emoji} {url}",
    "Stay home, wash your hands and don't panic {emoji}",
    "Working from home is fine until the cat joins the call {emoji}",
    "We'll get through this together, love you all {emoji} {url}",
    "My café closed again, life's hard lately {emoji}",
    "Who else is baking bread every day now? {emoji} {url}",
    "It's not a joke, y'all should stay safe out there {emoji}",
    "That naïve take on the virus is everywhere on TV tonight {url}",
)
EMOJIS = ("😷", "🦠", "🙏", "😂", "❤️", "💪", "📈", "🏥", "😢", "🇺🇸")
URLS = (
    "https://t.co/aB3dE9",
    "http://bit.ly/covid19upd",
    "www.who.int/emergencies",
    "HTTPURL",
    "",
)


def _render(template: str, rng: np.random.Generator) -> str:
    n = int(rng.integers(1, 900))
    text = template.format(
        place=PLACES[int(rng.integers(len(PLACES)))],
        kind=CASE_KINDS[int(rng.integers(len(CASE_KINDS)))],
        n=n,
        m=n + int(rng.integers(0, 20000)),
        k=int(rng.integers(0, 50)),
        emoji=EMOJIS[int(rng.integers(len(EMOJIS)))],
        url=URLS[int(rng.integers(len(URLS)))],
    )
    return " ".join(text.split())


def make_synthetic_corpus(
    n: int = 500, seed: int = 0, name: str = "synthetic", informative_share: float = 0.47
) -> Dataset:
    """`n` labeled tweets; the informative share mirrors the official class balance."""
    rng = np.random.default_rng(seed)
    tweets = []
    for i in range(n):
        informative = bool(rng.random() < informative_share)
        templates = INFORMATIVE_TEMPLATES if informative else UNINFORMATIVE_TEMPLATES
        template = templates[int(rng.integers(len(templates)))]
        tweets.append(
            Tweet(
                id=f"{name}-{seed}-{i:05d}",
                text=_render(template, rng),
                label=Label.INFORMATIVE if informative else Label.UNINFORMATIVE,
            )
        )
    return Dataset(name=name, tweets=tuple(tweets))


def synthetic_splits(
    seed: int = 0, n_train: int = 700, n_valid: int = 100
) -> Tuple[Dataset, Dataset]:
    """Disjoint train and validation corpora drawn from independent streams."""
    train = make_synthetic_corpus(n_train, seed=seed, name="train")
    valid = make_synthetic_corpus(n_valid, seed=seed + 1, name="valid")
    return train, valid


def write_synthetic(directory: Union[str, Path], seed: int = 0) -> Tuple[Path, Path]:
    """Write train.tsv and valid.tsv in the official layout."""
    directory = Path(directory)
    train, valid = synthetic_splits(seed)
    train_path, valid_path = directory / "train.tsv", directory / "valid.tsv"
    write_tsv(train, train_path)
    write_tsv(valid, valid_path)
    logger.info("Wrote synthetic corpus to %s", directory)
    return train_path, valid_path
