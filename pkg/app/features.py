"""Vocabulary, Bag-of-Words and TF-IDF featurization of cleaned tweets."""
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from app.errors import ConfigError, DataError

logger = logging.getLogger("tweetinfo.features")

FEATURE_KINDS = ("bow", "tfidf")

_TERM_RE = re.compile(r"(?u)\b\w\w+\b")


def tokenize_terms(text: str) -> List[str]:
    """Maximal runs of two or more word characters, in order."""
    return _TERM_RE.findall(text)


@dataclass(frozen=True)
class Vocabulary:
    """Bijection between terms and contiguous indices 0..V-1."""

    index_to_term: tuple
    term_to_index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mapping = {term: i for i, term in enumerate(self.index_to_term)}
        if len(mapping) != len(self.index_to_term):
            raise DataError("Vocabulary terms must be unique")
        object.__setattr__(self, "term_to_index", mapping)

    def __len__(self) -> int:
        return len(self.index_to_term)

    def __contains__(self, term: str) -> bool:
        return term in self.term_to_index

    def get(self, term: str) -> Optional[int]:
        return self.term_to_index.get(term)


@dataclass(frozen=True)
class SparseVector:
    """Sorted, non-zero entries of a `dim`-dimensional feature vector."""

    indices: np.ndarray
    values: np.ndarray
    dim: int

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise DataError("SparseVector indices and values differ in length")
        if len(self.indices) and (
            np.any(np.diff(self.indices) <= 0)
            or self.indices[-1] >= self.dim
            or self.indices[0] < 0
        ):
            raise DataError("SparseVector indices must be strictly increasing and below dim")

    @classmethod
    def from_counts(cls, counts: Dict[int, float], dim: int) -> "SparseVector":
        items = sorted((i, v) for i, v in counts.items() if v != 0)
        return cls(
            indices=np.array([i for i, _ in items], dtype=np.int64),
            values=np.array([v for _, v in items], dtype=np.float64),
            dim=dim,
        )

    def as_dict(self) -> Dict[int, float]:
        return dict(zip(self.indices.tolist(), self.values.tolist()))

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.values, self.values)))


@dataclass(frozen=True)
class TfidfModel:
    vocab: Vocabulary
    idf: np.ndarray
    n_docs: int

    def __post_init__(self):
        if len(self.idf) != len(self.vocab):
            raise DataError("idf length must equal vocabulary size")


def build_vocabulary(corpus: Sequence[str]) -> Vocabulary:
    """All distinct terms of the corpus, indexed in lexicographic order."""
    if len(corpus) == 0:
        raise DataError("Cannot build a vocabulary from an empty corpus")
    terms = set()
    for text in corpus:
        terms.update(tokenize_terms(text))
    vocab = Vocabulary(index_to_term=tuple(sorted(terms)))
    logger.info("Vocabulary fitted: %d terms from %d documents", len(vocab), len(corpus))
    return vocab


def _term_counts(text: str, vocab: Vocabulary) -> Dict[int, int]:
    counts: Dict[int, int] = {}
    for term in tokenize_terms(text):
        index = vocab.get(term)
        if index is not None:
            counts[index] = counts.get(index, 0) + 1
    return counts


def bow_vector(text: str, vocab: Vocabulary) -> SparseVector:
    """Raw in-vocabulary term counts; OOV terms are ignored."""
    return SparseVector.from_counts(_term_counts(text, vocab), len(vocab))


def tfidf_fit(corpus: Sequence[str]) -> TfidfModel:
    """Smoothed idf: ln((1 + N) / (1 + df)) + 1."""
    vocab = build_vocabulary(corpus)
    df = np.zeros(len(vocab), dtype=np.float64)
    for text in corpus:
        for term in set(tokenize_terms(text)):
            df[vocab.term_to_index[term]] += 1
    n_docs = len(corpus)
    idf = np.log((1.0 + n_docs) / (1.0 + df)) + 1.0
    return TfidfModel(vocab=vocab, idf=idf, n_docs=n_docs)


def tfidf_transform(text: str, model: TfidfModel) -> SparseVector:
    """count * idf, then L2-normalized; the zero vector stays zero."""
    counts = _term_counts(text, model.vocab)
    weighted = {i: c * float(model.idf[i]) for i, c in counts.items()}
    norm = math.sqrt(sum(v * v for v in weighted.values()))
    if norm > 0:
        weighted = {i: v / norm for i, v in weighted.items()}
    return SparseVector.from_counts(weighted, len(model.vocab))


def to_csr(vectors: Sequence[SparseVector], dim: Optional[int] = None) -> sp.csr_matrix:
    """Stack sparse vectors into an (n, dim) CSR matrix."""
    if dim is None:
        if not vectors:
            raise DataError("Cannot infer dimension of an empty feature list")
        dim = vectors[0].dim
    indptr = [0]
    indices: List[np.ndarray] = []
    data: List[np.ndarray] = []
    for v in vectors:
        if v.dim != dim:
            raise DataError(f"Feature dimension mismatch: {v.dim} != {dim}")
        indices.append(v.indices)
        data.append(v.values)
        indptr.append(indptr[-1] + len(v.indices))
    return sp.csr_matrix(
        (
            np.concatenate(data) if data else np.zeros(0),
            np.concatenate(indices) if indices else np.zeros(0, dtype=np.int64),
            np.asarray(indptr, dtype=np.int64),
        ),
        shape=(len(vectors), dim),
        dtype=np.float64,
    )


FeatureInput = Union[sp.spmatrix, Sequence[SparseVector]]


def as_csr(X: FeatureInput) -> sp.csr_matrix:
    if sp.issparse(X):
        return sp.csr_matrix(X, dtype=np.float64)
    return to_csr(list(X))


def rows(X: sp.csr_matrix) -> Iterable[SparseVector]:
    """Inverse of `to_csr`."""
    X = sp.csr_matrix(X)
    X.sort_indices()
    for i in range(X.shape[0]):
        start, end = X.indptr[i], X.indptr[i + 1]
        yield SparseVector(
            indices=X.indices[start:end].astype(np.int64),
            values=X.data[start:end].astype(np.float64),
            dim=X.shape[1],
        )


@dataclass(frozen=True)
class Featurizer:
    """A fitted BoW or TF-IDF featurizer over a frozen training vocabulary."""

    kind: str
    vocab: Vocabulary
    idf: Optional[np.ndarray] = None

    @classmethod
    def fit(cls, kind: str, corpus: Sequence[str]) -> "Featurizer":
        validate_feature_kind(kind)
        if kind == "tfidf":
            model = tfidf_fit(corpus)
            return cls(kind=kind, vocab=model.vocab, idf=model.idf)
        return cls(kind=kind, vocab=build_vocabulary(corpus))

    @property
    def dim(self) -> int:
        return len(self.vocab)

    @property
    def tfidf_model(self) -> TfidfModel:
        if self.idf is None:
            raise ConfigError("Featurizer has no idf weights")
        return TfidfModel(vocab=self.vocab, idf=self.idf, n_docs=0)

    def vector(self, text: str) -> SparseVector:
        if self.kind == "tfidf":
            return tfidf_transform(text, self.tfidf_model)
        return bow_vector(text, self.vocab)

    def transform(self, texts: Sequence[str]) -> sp.csr_matrix:
        model = self.tfidf_model if self.kind == "tfidf" else None
        vectors = [
            tfidf_transform(t, model) if model is not None else bow_vector(t, self.vocab)
            for t in texts
        ]
        return to_csr(vectors, dim=self.dim)


def validate_feature_kind(kind: str) -> str:
    if kind not in FEATURE_KINDS:
        raise ConfigError(
            f"Invalid feature kind: {kind}. Must be one of: {', '.join(FEATURE_KINDS)}"
        )
    return kind


def dump_vocabulary(model: TfidfModel, path: Union[str, Path]) -> None:
    """Write `term<TAB>index<TAB>idf` lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for index, term in enumerate(model.vocab.index_to_term):
            handle.write(f"{term}\t{index}\t{float(model.idf[index])!r}\n")
