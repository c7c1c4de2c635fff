"""Two-hidden-layer perceptron (in -> 5 -> 2 -> 1) trained full-batch with L-BFGS."""
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from app.classifiers.base import check_dim, check_training_data, decode_labels
from app.corpus import Label
from app.errors import ArtifactError, ConfigError
from app.features import FeatureInput, as_csr
from app.numopt import Objective, QuasiNewtonConfig, minimize_quasi_newton

logger = logging.getLogger("tweetinfo.classifiers.mlp")

HIDDEN_SIZES = (5, 2)
MLP_INITS = ("glorot", "zeros")


def layer_shapes(n_features: int) -> List[Tuple[int, int]]:
    sizes = (n_features,) + HIDDEN_SIZES + (1,)
    return [(sizes[i], sizes[i + 1]) for i in range(len(sizes) - 1)]


@dataclass(frozen=True)
class MlpParams:
    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]
    l2_alpha: float

    kind = "mlp"

    def __post_init__(self):
        expected = layer_shapes(self.weights[0].shape[0])
        if [w.shape for w in self.weights] != expected:
            raise ArtifactError(f"MLP weight shapes must be {expected}")
        if [b.shape for b in self.biases] != [(out,) for _, out in expected]:
            raise ArtifactError("MLP bias shapes do not match the layers")

    @property
    def dim(self) -> int:
        return self.weights[0].shape[0]

    def logits(self, X: FeatureInput) -> np.ndarray:
        X = check_dim(as_csr(X), self.dim)
        return _forward(X, self.weights, self.biases)[-1].ravel()

    def scores(self, X: FeatureInput) -> np.ndarray:
        return expit(self.logits(X))

    def predict(self, X: FeatureInput) -> List[Label]:
        return decode_labels(self.logits(X) > 0)

    def to_payload(self) -> Dict[str, Any]:
        return {
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "l2_alpha": self.l2_alpha,
        }

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> "MlpParams":
        return cls(
            weights=tuple(np.asarray(w, dtype=np.float64) for w in payload["weights"]),
            biases=tuple(np.asarray(b, dtype=np.float64) for b in payload["biases"]),
            l2_alpha=float(payload["l2_alpha"]),
        )


def _forward(X, weights, biases) -> List[np.ndarray]:
    """Pre-activations of every layer; hidden layers use ReLU."""
    pre = []
    activation = X
    for i, (w, b) in enumerate(zip(weights, biases)):
        z = np.asarray(activation @ w) + b
        pre.append(z)
        if i < len(weights) - 1:
            activation = np.maximum(z, 0.0)
    return pre


def _unpack(theta: np.ndarray, shapes) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    weights, biases = [], []
    offset = 0
    for fan_in, fan_out in shapes:
        size = fan_in * fan_out
        weights.append(theta[offset : offset + size].reshape(fan_in, fan_out))
        offset += size
        biases.append(theta[offset : offset + fan_out])
        offset += fan_out
    return weights, biases


def _pack(weights, biases) -> np.ndarray:
    parts = []
    for w, b in zip(weights, biases):
        parts.append(np.ravel(w))
        parts.append(np.ravel(b))
    return np.concatenate(parts)


def mlp_objective(X: sp.csr_matrix, targets: np.ndarray, alpha: float) -> Objective:
    """Mean cross-entropy plus (alpha / 2n) * sum of squared weights (biases excluded)."""
    shapes = layer_shapes(X.shape[1])
    n = X.shape[0]
    t = targets.astype(np.float64)
    Xt = X.T.tocsr()

    def evaluate(theta: np.ndarray):
        weights, biases = _unpack(theta, shapes)
        pre = _forward(X, weights, biases)
        logit = pre[-1].ravel()
        penalty = sum(np.sum(w * w) for w in weights)
        value = np.mean(np.logaddexp(0.0, logit) - t * logit) + alpha / (2.0 * n) * penalty

        delta = ((expit(logit) - t) / n).reshape(-1, 1)
        grad_w: List[np.ndarray] = [None] * len(weights)
        grad_b: List[np.ndarray] = [None] * len(weights)
        for i in range(len(weights) - 1, -1, -1):
            below = Xt if i == 0 else np.maximum(pre[i - 1], 0.0).T
            grad_w[i] = np.asarray(below @ delta) + (alpha / n) * weights[i]
            grad_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ weights[i].T) * (pre[i - 1] > 0)
        return value, _pack(grad_w, grad_b)

    dim = sum(a * b + b for a, b in shapes)
    return Objective(dim=dim, eval=evaluate)


def _initial_point(n_features: int, init: str, seed: int) -> np.ndarray:
    shapes = layer_shapes(n_features)
    if init == "zeros":
        return np.zeros(sum(a * b + b for a, b in shapes))
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for i, (fan_in, fan_out) in enumerate(shapes):
        # Glorot uniform; the logistic output layer uses the narrower bound
        factor = 2.0 if i == len(shapes) - 1 else 6.0
        bound = np.sqrt(factor / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(rng.uniform(-bound, bound, size=fan_out))
    return _pack(weights, biases)


def mlp_fit(
    X: FeatureInput,
    y: Sequence[Label],
    alpha: float = 1e-5,
    *,
    seed: int = 0,
    max_iters: int = 200,
    init: str = "glorot",
) -> MlpParams:
    """
    Train the network full-batch with the quasi-Newton solver.

    Raises:
        ConvergenceError: the loss became non-finite.
        ConfigError: unknown init scheme or negative alpha.
    """
    if init not in MLP_INITS:
        raise ConfigError(f"Invalid init: {init}. Must be one of: {', '.join(MLP_INITS)}")
    if alpha < 0:
        raise ConfigError(f"alpha must be non-negative, got {alpha}")
    X, targets = check_training_data(X, y)
    objective = mlp_objective(X, targets, alpha)
    result = minimize_quasi_newton(
        objective,
        _initial_point(X.shape[1], init, seed),
        QuasiNewtonConfig(max_iters=max_iters),
    )
    weights, biases = _unpack(result.point, layer_shapes(X.shape[1]))
    logger.info(
        "Fitted MLP: %d inputs, %d iterations, loss %.6g",
        X.shape[1],
        result.iterations,
        result.value,
    )
    return MlpParams(
        weights=tuple(w.copy() for w in weights),
        biases=tuple(b.copy() for b in biases),
        l2_alpha=alpha,
    )


def mlp_predict(X: FeatureInput, params: MlpParams) -> List[Label]:
    return params.predict(X)
