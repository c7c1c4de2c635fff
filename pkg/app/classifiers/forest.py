"""
Random forest of depth-limited Gini trees over sparse term features.

Each tree is grown on a bootstrap sample (drawn counts become sample
weights) and considers floor(sqrt(V)) random features per node.
Prediction is a majority vote of the trees.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from app.classifiers.base import check_dim, check_training_data, decode_labels
from app.corpus import Label
from app.errors import ArtifactError, ConfigError
from app.features import FeatureInput, as_csr

logger = logging.getLogger("tweetinfo.classifiers.forest")

LEAF = -1
_MIN_GAIN = 1e-12


@dataclass(frozen=True)
class DecisionTree:
    """
    Array-encoded binary tree; node 0 is the root.

    Internal nodes send `x[feature] <= threshold` left. Leaves have
    `feature == -1` and carry the class distribution in `value`
    (column 0 UNINFORMATIVE, column 1 INFORMATIVE).
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if self.feature[node] != LEAF:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return int(depths.max(initial=0))

    def apply(self, X: sp.csr_matrix) -> np.ndarray:
        """Leaf index reached by every row."""
        n = X.shape[0]
        nodes = np.zeros(n, dtype=np.int64)
        rows = np.arange(n)
        active = self.feature[nodes] != LEAF
        while np.any(active):
            r = rows[active]
            cur = nodes[active]
            values = np.asarray(X[r, self.feature[cur]]).ravel()
            go_left = values <= self.threshold[cur]
            nodes[r] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[nodes] != LEAF
        return nodes

    def votes(self, X: sp.csr_matrix) -> np.ndarray:
        """1 where the reached leaf favors INFORMATIVE strictly."""
        leaves = self.value[self.apply(X)]
        return (leaves[:, 1] > leaves[:, 0]).astype(np.int64)

    def to_payload(self) -> Dict[str, Any]:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> "DecisionTree":
        return cls(
            feature=np.asarray(payload["feature"], dtype=np.int64),
            threshold=np.asarray(payload["threshold"], dtype=np.float64),
            left=np.asarray(payload["left"], dtype=np.int64),
            right=np.asarray(payload["right"], dtype=np.int64),
            value=np.asarray(payload["value"], dtype=np.float64).reshape(-1, 2),
        )


@dataclass(frozen=True)
class ForestParams:
    trees: Tuple[DecisionTree, ...]
    max_depth: int
    n_trees: int
    n_features: int

    kind = "forest"

    def __post_init__(self):
        if any(tree.depth() > self.max_depth for tree in self.trees):
            raise ArtifactError(f"A tree exceeds the depth limit {self.max_depth}")
        if len(self.trees) != self.n_trees:
            raise ArtifactError(f"Forest holds {len(self.trees)} trees, expected {self.n_trees}")

    @property
    def dim(self) -> int:
        return self.n_features

    def vote_counts(self, X: FeatureInput) -> np.ndarray:
        """Number of trees voting INFORMATIVE per row."""
        X = check_dim(as_csr(X), self.dim)
        tally = np.zeros(X.shape[0], dtype=np.int64)
        for tree in self.trees:
            tally += tree.votes(X)
        return tally

    def scores(self, X: FeatureInput) -> np.ndarray:
        return self.vote_counts(X) / float(self.n_trees)

    def predict(self, X: FeatureInput) -> List[Label]:
        # a tied vote goes to UNINFORMATIVE
        return decode_labels(2 * self.vote_counts(X) > self.n_trees)

    def to_payload(self) -> Dict[str, Any]:
        return {
            "max_depth": self.max_depth,
            "n_trees": self.n_trees,
            "n_features": self.n_features,
            "trees": [tree.to_payload() for tree in self.trees],
        }

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> "ForestParams":
        return cls(
            trees=tuple(DecisionTree.from_payload(t) for t in payload["trees"]),
            max_depth=int(payload["max_depth"]),
            n_trees=int(payload["n_trees"]),
            n_features=int(payload["n_features"]),
        )


def _weighted_gini(total: np.ndarray, positive: np.ndarray) -> np.ndarray:
    """total * gini(p) = 2 * pos * neg / total, zero for empty nodes."""
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 2.0 * positive * (total - positive) / total
    return np.where(total > 0, out, 0.0)


def _best_split(
    columns: np.ndarray, weights: np.ndarray, positive: np.ndarray
) -> Optional[Tuple[int, float, float]]:
    """Best (column, threshold, gain) over a dense (n, k) block, or None."""
    total = weights.sum()
    pos_total = (weights * positive).sum()
    parent = float(_weighted_gini(np.array([total]), np.array([pos_total]))[0])
    best: Optional[Tuple[int, float, float]] = None

    for j in range(columns.shape[1]):
        col = columns[:, j]
        order = np.argsort(col, kind="stable")
        values = col[order]
        distinct = values[:-1] < values[1:]
        if not np.any(distinct):
            continue
        w_left = np.cumsum(weights[order])[:-1]
        p_left = np.cumsum((weights * positive)[order])[:-1]
        child = _weighted_gini(w_left, p_left) + _weighted_gini(total - w_left, pos_total - p_left)
        child = np.where(distinct, child, np.inf)
        i = int(np.argmin(child))
        gain = parent - float(child[i])
        if gain > _MIN_GAIN and (best is None or gain > best[2]):
            best = (j, 0.5 * (values[i] + values[i + 1]), gain)
    return best


class _TreeBuilder:
    def __init__(self, X: sp.csc_matrix, targets: np.ndarray, max_depth: int, rng):
        self.X = X
        self.targets = targets.astype(np.float64)
        self.max_depth = max_depth
        self.rng = rng
        self.n_sampled = max(1, int(math.isqrt(X.shape[1])))
        self.feature: List[int] = []
        self.threshold: List[float] = []
        self.left: List[int] = []
        self.right: List[int] = []
        self.value: List[Tuple[float, float]] = []

    def _new_node(self, weights: np.ndarray, positive: np.ndarray) -> int:
        total = weights.sum()
        share = float((weights * positive).sum() / total) if total > 0 else 0.0
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append((1.0 - share, share))
        return len(self.feature) - 1

    def grow(self, rows: np.ndarray, weights: np.ndarray, depth: int) -> int:
        positive = self.targets[rows]
        node = self._new_node(weights, positive)
        pure = np.all(positive == positive[0])
        if depth >= self.max_depth or rows.size < 2 or pure or self.X.shape[1] == 0:
            return node

        features = self.rng.choice(self.X.shape[1], size=self.n_sampled, replace=False)
        block = self.X[:, features][rows, :].toarray()
        split = _best_split(block, weights, positive)
        if split is None:
            return node

        j, threshold, _ = split
        goes_left = block[:, j] <= threshold
        self.feature[node] = int(features[j])
        self.threshold[node] = float(threshold)
        self.left[node] = self.grow(rows[goes_left], weights[goes_left], depth + 1)
        self.right[node] = self.grow(rows[~goes_left], weights[~goes_left], depth + 1)
        return node

    def build(self, counts: np.ndarray) -> DecisionTree:
        rows = np.flatnonzero(counts)
        self.grow(rows, counts[rows].astype(np.float64), 0)
        return DecisionTree(
            feature=np.asarray(self.feature, dtype=np.int64),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.int64),
            right=np.asarray(self.right, dtype=np.int64),
            value=np.asarray(self.value, dtype=np.float64).reshape(-1, 2),
        )


def forest_fit(
    X: FeatureInput,
    y: Sequence[Label],
    n_trees: int = 100,
    max_depth: int = 8,
    seed: int = 0,
) -> ForestParams:
    """
    Grow `n_trees` bootstrap trees; per-tree generators are spawned from `seed`.

    Raises:
        DataError: empty input or mismatched lengths.
        ConfigError: non-positive n_trees or max_depth.
    """
    if n_trees < 1 or max_depth < 1:
        raise ConfigError("n_trees and max_depth must be at least 1")
    X, targets = check_training_data(X, y)
    Xc = X.tocsc()
    n = X.shape[0]

    trees = []
    for child_seed in np.random.SeedSequence(seed).spawn(n_trees):
        rng = np.random.default_rng(child_seed)
        counts = np.bincount(rng.integers(0, n, size=n), minlength=n)
        trees.append(_TreeBuilder(Xc, targets, max_depth, rng).build(counts))

    params = ForestParams(
        trees=tuple(trees), max_depth=max_depth, n_trees=n_trees, n_features=X.shape[1]
    )
    logger.info(
        "Fitted forest: %d trees, deepest %d (limit %d)",
        n_trees,
        max(tree.depth() for tree in trees),
        max_depth,
    )
    return params


def forest_predict(X: FeatureInput, params: ForestParams) -> List[Label]:
    return params.predict(X)
