from typing import List, Optional, Sequence, Tuple, Union

import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from attrs import define, field
from scipy import sparse

from notecnn.constants import NOTECNN_N_WORKERS
from notecnn.exceptions import ArgumentError
from notecnn.helpers import progress

logger = logging.getLogger()

Matrix = Union[np.ndarray, sparse.spmatrix]

LEAF = -1


@define(eq=False)
class DecisionTree:
    """Array-backed binary tree. Internal nodes send ``x[feature] <= threshold`` left; every node keeps its class counts."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    # (n_nodes, 2) negative / positive sample counts
    counts: np.ndarray

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if self.feature[node] != LEAF:
                depth[self.left[node]] = depth[self.right[node]] = depth[node] + 1
        return int(depth.max())

    def leaf_fraction(self) -> np.ndarray:
        totals = self.counts.sum(axis=1)
        return np.where(totals > 0, self.counts[:, 1] / np.maximum(totals, 1), 0.0)

    def apply(self, X: sparse.csr_matrix) -> np.ndarray:
        """Index of the leaf each row of ``X`` lands in."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while active.size:
            feats = self.feature[node[active]]
            values = np.asarray(X[active, feats]).ravel()
            go_left = values <= self.threshold[node[active]]
            node[active] = np.where(go_left, self.left[node[active]], self.right[node[active]])
            active = active[self.feature[node[active]] != LEAF]
        return node

    def predict_proba(self, X: Matrix) -> np.ndarray:
        return self.leaf_fraction()[self.apply(as_csr(X))]


@define(eq=False)
class RandomForest:
    trees: List[DecisionTree]
    n_features: int
    max_depth: Optional[int] = None
    min_leaf: int = 1
    features_per_split: Optional[int] = None
    bootstrap: bool = True
    seed: int = 0

    @property
    def n_trees(self) -> int:
        return len(self.trees)


def as_csr(X: Matrix) -> sparse.csr_matrix:
    return X.tocsr() if sparse.issparse(X) else sparse.csr_matrix(np.asarray(X, dtype=np.float64))


def gini(pos: np.ndarray, total: np.ndarray) -> np.ndarray:
    p = pos / total
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def best_split(values: np.ndarray, y: np.ndarray, min_leaf: int) -> Optional[Tuple[float, float]]:
    """Lowest weighted child Gini over midpoint thresholds of one feature, as (impurity, threshold).

    Ties go to the smallest threshold; returns None when no threshold leaves ``min_leaf`` samples on each side.

    >>> best_split(np.array([0.0, 1.0, 2.0, 3.0]), np.array([0, 0, 1, 1]), 1)
    (0.0, 1.5)
    """
    n = values.shape[0]
    order = np.argsort(values, kind="stable")
    vs = values[order]
    cum_pos = np.cumsum(y[order])
    n_left = np.arange(1, n)
    valid = (vs[:-1] < vs[1:]) & (n_left >= min_leaf) & (n - n_left >= min_leaf)
    if not valid.any():
        return None
    pos_left = cum_pos[:-1]
    pos_right = cum_pos[-1] - pos_left
    n_right = n - n_left
    impurity = (n_left * gini(pos_left, n_left) + n_right * gini(pos_right, n_right)) / n
    impurity = np.where(valid, impurity, np.inf)
    i = int(np.argmin(impurity))
    threshold = (vs[i] + vs[i + 1]) / 2.0
    if not threshold < vs[i + 1]:
        threshold = vs[i]
    return float(impurity[i]), float(threshold)


def _non_constant(X_node: sparse.csc_matrix) -> np.ndarray:
    hi = X_node.max(axis=0).toarray().ravel()
    lo = X_node.min(axis=0).toarray().ravel()
    return np.flatnonzero(hi > lo)


def _column(X_node: sparse.csc_matrix, j: int) -> np.ndarray:
    values = np.zeros(X_node.shape[0])
    start, end = X_node.indptr[j], X_node.indptr[j + 1]
    values[X_node.indices[start:end]] = X_node.data[start:end]
    return values


def fit_tree(
    X: Matrix,
    y: Sequence[int],
    rng: np.random.Generator,
    max_depth: Optional[int] = None,
    min_leaf: int = 1,
    features_per_split: Optional[int] = None,
    sample: Optional[np.ndarray] = None,
) -> DecisionTree:
    """Grow one CART tree by Gini impurity on the rows ``sample`` (repeats allowed) of ``X``.

    At each node ``features_per_split`` candidates are drawn without replacement among the features
    that are not constant on the node's rows and scanned in ascending index order; a later feature
    replaces the incumbent only with strictly lower impurity. Nodes stop at purity, ``max_depth``,
    or when no split keeps ``min_leaf`` rows on both sides.
    """
    X = as_csr(X)
    y = np.asarray(y, dtype=np.int64)
    rows = np.arange(X.shape[0]) if sample is None else np.asarray(sample, dtype=np.int64)
    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node(node_rows: np.ndarray) -> int:
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        counts.append(np.bincount(y[node_rows], minlength=2)[:2])
        return len(feature) - 1

    stack = [(new_node(rows), rows, 0)]
    while stack:
        node, node_rows, depth = stack.pop()
        n_neg, n_pos = counts[node]
        if n_neg == 0 or n_pos == 0 or (max_depth is not None and depth >= max_depth) or len(node_rows) < 2 * min_leaf:
            continue
        X_node = X[node_rows].tocsc()
        candidates = _non_constant(X_node)
        if candidates.size == 0:
            continue
        if features_per_split is not None and features_per_split < candidates.size:
            candidates = np.sort(rng.choice(candidates, size=features_per_split, replace=False))
        y_node = y[node_rows]
        best = None
        for j in candidates:
            found = best_split(_column(X_node, j), y_node, min_leaf)
            if found is not None and (best is None or found[0] < best[0]):
                best = (found[0], found[1], int(j))
        if best is None:
            continue
        _, cut, j = best
        goes_left = _column(X_node, j) <= cut
        feature[node], threshold[node] = j, cut
        left_rows, right_rows = node_rows[goes_left], node_rows[~goes_left]
        left[node] = new_node(left_rows)
        right[node] = new_node(right_rows)
        # right pushed first so the left subtree is numbered before it
        stack.append((right[node], right_rows, depth + 1))
        stack.append((left[node], left_rows, depth + 1))

    return DecisionTree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        counts=np.asarray(counts, dtype=np.int64).reshape(-1, 2),
    )


def default_features_per_split(n_features: int) -> int:
    return max(1, math.ceil(math.sqrt(n_features)))


def rf_train(
    X: Matrix,
    labels: Sequence[bool],
    n_trees: int = 100,
    seed: int = 0,
    max_depth: Optional[int] = None,
    min_leaf: int = 1,
    features_per_split: Optional[int] = None,
    bootstrap: bool = True,
    n_workers: int = NOTECNN_N_WORKERS,
) -> RandomForest:
    """Train ``n_trees`` trees, tree ``i`` drawing its bootstrap sample and feature subsets from PCG64([seed, i]).

    Trees are grown on a thread pool; the per-tree streams make the result independent of ``n_workers``.
    """
    X = as_csr(X)
    y = np.asarray([int(bool(label)) for label in labels], dtype=np.int64)
    if X.shape[0] != y.shape[0]:
        raise ArgumentError(f"{X.shape[0]} vectors for {y.shape[0]} labels")
    if y.shape[0] < 2:
        raise ArgumentError("random forest needs at least 2 samples")
    if y.min() == y.max():
        raise ArgumentError("random forest needs both classes in its training labels")
    if n_trees < 1:
        raise ArgumentError(f"n_trees must be >= 1, got {n_trees}")
    n_features = X.shape[1]
    per_split = min(features_per_split or default_features_per_split(n_features), max(n_features, 1))

    def grow(index: int) -> DecisionTree:
        rng = np.random.Generator(np.random.PCG64([seed, index]))
        sample = rng.integers(0, y.shape[0], size=y.shape[0]) if bootstrap else None
        return fit_tree(X, y, rng, max_depth=max_depth, min_leaf=min_leaf, features_per_split=per_split, sample=sample)

    with ThreadPoolExecutor(max_workers=max(1, n_workers)) as executor:
        trees = list(progress(executor.map(grow, range(n_trees)), total=n_trees, desc="forest", unit="tree"))
    logger.debug(f"forest: {n_trees} trees, mean size {np.mean([t.n_nodes for t in trees]):.1f} nodes")
    return RandomForest(
        trees=trees,
        n_features=n_features,
        max_depth=max_depth,
        min_leaf=min_leaf,
        features_per_split=per_split,
        bootstrap=bootstrap,
        seed=seed,
    )


def rf_predict(X: Matrix, forest: RandomForest) -> Tuple[np.ndarray, np.ndarray]:
    """(labels, positive-class probabilities); probability is the mean leaf fraction and 0.5 is labeled negative."""
    X = as_csr(X)
    if X.shape[1] != forest.n_features:
        raise ArgumentError(f"vectors have {X.shape[1]} features, forest expects {forest.n_features}")
    proba = np.zeros(X.shape[0])
    for tree in forest.trees:
        proba += tree.predict_proba(X)
    proba /= forest.n_trees
    return proba > 0.5, proba
