"""Label encoding, input checks and hyperparameters shared by the classical models."""
from typing import List, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field

from app.corpus import Label
from app.errors import DataError
from app.features import FeatureInput, as_csr

MODEL_KINDS = ("logreg", "svm", "nb", "forest", "mlp")


class ClassicalHyperparameters(BaseModel):
    """Defaults follow the conventional toolkit defaults; unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    C: float = Field(1.0, gt=0, description="Logistic regression data-term weight")
    svm_C: float = Field(1.0, gt=0, description="Linear SVM data-term weight")
    nb_alpha: float = Field(1.0, gt=0, description="Laplace smoothing")
    n_trees: int = Field(100, ge=1)
    max_depth: int = Field(8, ge=1)
    mlp_alpha: float = Field(1e-5, ge=0, description="L2 penalty of the MLP")
    mlp_max_iters: int = Field(200, ge=1)
    linear_max_iters: int = Field(1000, ge=1)


def encode_labels(y: Sequence[Label]) -> np.ndarray:
    """INFORMATIVE -> 1, UNINFORMATIVE -> 0."""
    return np.array([1 if Label(label).positive else 0 for label in y], dtype=np.int64)


def decode_labels(positive: np.ndarray) -> List[Label]:
    return [Label.INFORMATIVE if p else Label.UNINFORMATIVE for p in np.asarray(positive)]


def check_training_data(X: FeatureInput, y: Sequence[Label]) -> Tuple[sp.csr_matrix, np.ndarray]:
    X = as_csr(X)
    if X.shape[0] == 0:
        raise DataError("Cannot fit a model on an empty training set")
    if X.shape[0] != len(y):
        raise DataError(f"Feature rows ({X.shape[0]}) and labels ({len(y)}) differ")
    return X, encode_labels(y)


def require_both_classes(targets: np.ndarray) -> None:
    if np.unique(targets).size < 2:
        raise DataError("Training labels contain a single class; both classes are required")


def check_dim(X: sp.csr_matrix, dim: int) -> sp.csr_matrix:
    if X.shape[1] != dim:
        raise DataError(f"Feature dimension {X.shape[1]} does not match model dimension {dim}")
    return X
