"""Conventional classifiers over sparse BoW / TF-IDF features."""
from typing import Optional, Sequence, Union

from app.classifiers.base import MODEL_KINDS, ClassicalHyperparameters
from app.classifiers.forest import ForestParams, forest_fit, forest_predict
from app.classifiers.linear import LinearModelParams, logreg_fit, svm_fit
from app.classifiers.mlp import MlpParams, mlp_fit, mlp_predict
from app.classifiers.naive_bayes import NaiveBayesParams, nb_fit, nb_predict
from app.corpus import Label
from app.errors import ConfigError
from app.features import FeatureInput

ModelParams = Union[LinearModelParams, NaiveBayesParams, ForestParams, MlpParams]

PARAMS_BY_KIND = {
    "logreg": LinearModelParams,
    "svm": LinearModelParams,
    "nb": NaiveBayesParams,
    "forest": ForestParams,
    "mlp": MlpParams,
}


def validate_model_kind(kind: str) -> str:
    if kind not in MODEL_KINDS:
        raise ConfigError(f"Invalid model: {kind}. Must be one of: {', '.join(MODEL_KINDS)}")
    return kind


def fit_classical(
    kind: str,
    X: FeatureInput,
    y: Sequence[Label],
    hyper: Optional[ClassicalHyperparameters] = None,
    seed: int = 0,
) -> ModelParams:
    """Fit the named conventional model with the given hyperparameters."""
    validate_model_kind(kind)
    hyper = hyper or ClassicalHyperparameters()
    if kind == "logreg":
        return logreg_fit(X, y, hyper.C, max_iters=hyper.linear_max_iters)
    if kind == "svm":
        return svm_fit(X, y, hyper.svm_C, max_iters=hyper.linear_max_iters)
    if kind == "nb":
        return nb_fit(X, y, hyper.nb_alpha)
    if kind == "forest":
        return forest_fit(X, y, n_trees=hyper.n_trees, max_depth=hyper.max_depth, seed=seed)
    return mlp_fit(X, y, hyper.mlp_alpha, seed=seed, max_iters=hyper.mlp_max_iters)


__all__ = [
    "MODEL_KINDS",
    "PARAMS_BY_KIND",
    "ClassicalHyperparameters",
    "ForestParams",
    "LinearModelParams",
    "MlpParams",
    "ModelParams",
    "NaiveBayesParams",
    "fit_classical",
    "forest_fit",
    "forest_predict",
    "logreg_fit",
    "mlp_fit",
    "mlp_predict",
    "nb_fit",
    "nb_predict",
    "svm_fit",
    "validate_model_kind",
]
