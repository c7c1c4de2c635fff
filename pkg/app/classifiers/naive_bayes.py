"""Multinomial Naive Bayes with Laplace smoothing."""
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence

import numpy as np
from scipy.special import logsumexp

from app.classifiers.base import check_dim, check_training_data, decode_labels
from app.corpus import Label
from app.errors import ArtifactError, ConfigError, DataError
from app.features import FeatureInput, SparseVector, as_csr

logger = logging.getLogger("tweetinfo.classifiers.naive_bayes")


@dataclass(frozen=True)
class NaiveBayesParams:
    """Row 0 is UNINFORMATIVE, row 1 is INFORMATIVE."""

    kind = "nb"

    log_prior: np.ndarray
    log_likelihood: np.ndarray
    smoothing_alpha: float

    def __post_init__(self):
        if self.log_prior.shape != (2,) or self.log_likelihood.ndim != 2:
            raise ArtifactError("Naive Bayes parameters have the wrong shape")
        if self.log_likelihood.shape[0] != 2:
            raise ArtifactError("Naive Bayes likelihood must have one row per class")

    @property
    def dim(self) -> int:
        return self.log_likelihood.shape[1]

    def joint_log_likelihood(self, X: FeatureInput) -> np.ndarray:
        X = check_dim(as_csr(X), self.dim)
        if X.nnz and X.data.min() < 0:
            raise DataError("Naive Bayes requires non-negative feature values")
        return np.asarray(X @ self.log_likelihood.T) + self.log_prior

    def predict_log_proba(self, X: FeatureInput) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        return jll - logsumexp(jll, axis=1, keepdims=True)

    def scores(self, X: FeatureInput) -> np.ndarray:
        return np.exp(self.predict_log_proba(X)[:, 1])

    def predict(self, X: FeatureInput) -> List[Label]:
        jll = self.joint_log_likelihood(X)
        # equal posteriors go to UNINFORMATIVE
        return decode_labels(jll[:, 1] > jll[:, 0])

    def to_payload(self) -> Dict[str, Any]:
        return {
            "log_prior": self.log_prior.tolist(),
            "log_likelihood": self.log_likelihood.tolist(),
            "smoothing_alpha": self.smoothing_alpha,
        }

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> "NaiveBayesParams":
        return cls(
            log_prior=np.asarray(payload["log_prior"], dtype=np.float64),
            log_likelihood=np.asarray(payload["log_likelihood"], dtype=np.float64),
            smoothing_alpha=float(payload["smoothing_alpha"]),
        )


def nb_fit(X: FeatureInput, y: Sequence[Label], alpha: float = 1.0) -> NaiveBayesParams:
    """
    Estimate class priors and smoothed per-class term distributions.

    Raises:
        DataError: negative feature values or empty input.
        ConfigError: non-positive alpha.
    """
    if alpha <= 0:
        raise ConfigError(f"Smoothing alpha must be positive, got {alpha}")
    X, targets = check_training_data(X, y)
    if X.nnz and X.data.min() < 0:
        raise DataError("Naive Bayes requires non-negative feature values")

    n_terms = X.shape[1]
    class_counts = np.bincount(targets, minlength=2).astype(np.float64)
    term_counts = np.vstack(
        [np.asarray(X[targets == c].sum(axis=0)).ravel() for c in (0, 1)]
    )
    smoothed = term_counts + alpha
    log_likelihood = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))
    with np.errstate(divide="ignore"):
        log_prior = np.log(class_counts / class_counts.sum())

    logger.info("Fitted Naive Bayes: %d terms, alpha=%g", n_terms, alpha)
    return NaiveBayesParams(
        log_prior=log_prior, log_likelihood=log_likelihood, smoothing_alpha=alpha
    )


def nb_predict(x: SparseVector, params: NaiveBayesParams) -> Label:
    return params.predict([x])[0]
