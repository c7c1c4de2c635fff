"""
L2-regularized linear models: logistic regression and squared-hinge SVM.

Both minimize 0.5 * ||theta||^2 + C * sum(loss_i) where theta = (w, b);
the bias is penalized like the weights, as in the liblinear regime.
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from app.classifiers.base import check_dim, check_training_data, decode_labels, require_both_classes
from app.corpus import Label
from app.errors import ArtifactError
from app.features import FeatureInput, as_csr
from app.numopt import Objective, QuasiNewtonConfig, minimize_quasi_newton

logger = logging.getLogger("tweetinfo.classifiers.linear")

LINEAR_LOSSES = ("logistic", "squared_hinge")


@dataclass(frozen=True)
class LinearModelParams:
    weights: np.ndarray
    bias: float
    regularization_C: float
    loss: str = "logistic"

    def __post_init__(self):
        if not np.all(np.isfinite(self.weights)) or not np.isfinite(self.bias):
            raise ArtifactError("Linear model parameters must be finite")

    @property
    def kind(self) -> str:
        return "logreg" if self.loss == "logistic" else "svm"

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    def decision_function(self, X: FeatureInput) -> np.ndarray:
        X = check_dim(as_csr(X), self.dim)
        return X @ self.weights + self.bias

    def scores(self, X: FeatureInput) -> np.ndarray:
        return self.decision_function(X)

    def predict(self, X: FeatureInput) -> List[Label]:
        # zero decision value goes to UNINFORMATIVE
        return decode_labels(self.decision_function(X) > 0)

    def to_payload(self) -> Dict[str, Any]:
        return {
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "regularization_C": self.regularization_C,
            "loss": self.loss,
        }

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> "LinearModelParams":
        return cls(
            weights=np.asarray(payload["weights"], dtype=np.float64),
            bias=float(payload["bias"]),
            regularization_C=float(payload["regularization_C"]),
            loss=payload.get("loss", "logistic"),
        )


def _augment(X: sp.csr_matrix) -> sp.csr_matrix:
    return sp.hstack([X, np.ones((X.shape[0], 1))], format="csr")


def logistic_objective(X: sp.csr_matrix, signs: np.ndarray, C: float) -> Objective:
    """0.5 ||theta||^2 + C * sum log(1 + exp(-y * (Xa theta)))."""
    Xa = _augment(X)

    def evaluate(theta: np.ndarray):
        margins = signs * (Xa @ theta)
        value = 0.5 * np.dot(theta, theta) + C * np.sum(np.logaddexp(0.0, -margins))
        coef = -C * signs * expit(-margins)
        return value, theta + Xa.T @ coef

    return Objective(dim=Xa.shape[1], eval=evaluate)


def squared_hinge_objective(X: sp.csr_matrix, signs: np.ndarray, C: float) -> Objective:
    """0.5 ||theta||^2 + C * sum max(0, 1 - y * (Xa theta))^2."""
    Xa = _augment(X)

    def evaluate(theta: np.ndarray):
        slack = np.maximum(0.0, 1.0 - signs * (Xa @ theta))
        value = 0.5 * np.dot(theta, theta) + C * np.dot(slack, slack)
        coef = -2.0 * C * signs * slack
        return value, theta + Xa.T @ coef

    return Objective(dim=Xa.shape[1], eval=evaluate)


def _fit_linear(
    X: FeatureInput, y: Sequence[Label], C: float, loss: str, max_iters: int
) -> LinearModelParams:
    X, targets = check_training_data(X, y)
    require_both_classes(targets)
    signs = np.where(targets == 1, 1.0, -1.0)

    build = logistic_objective if loss == "logistic" else squared_hinge_objective
    objective = build(X, signs, C)
    result = minimize_quasi_newton(
        objective, np.zeros(objective.dim), QuasiNewtonConfig(max_iters=max_iters)
    )
    theta = result.point
    logger.info(
        "Fitted %s model: dim=%d C=%g iterations=%d objective=%.6g",
        loss,
        X.shape[1],
        C,
        result.iterations,
        result.value,
    )
    return LinearModelParams(
        weights=theta[:-1].copy(), bias=float(theta[-1]), regularization_C=C, loss=loss
    )


def logreg_fit(
    X: FeatureInput, y: Sequence[Label], C: float = 1.0, *, max_iters: int = 1000
) -> LinearModelParams:
    """
    Fit L2-regularized logistic regression.

    Raises:
        DataError: empty input, mismatched lengths, or a single-class y.
    """
    return _fit_linear(X, y, C, "logistic", max_iters)


def svm_fit(
    X: FeatureInput, y: Sequence[Label], C: float = 1.0, *, max_iters: int = 1000
) -> LinearModelParams:
    """Fit a linear SVM with L2 penalty and squared hinge loss."""
    return _fit_linear(X, y, C, "squared_hinge", max_iters)
