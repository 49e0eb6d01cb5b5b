from typing import Any, Dict, Optional, Sequence, Tuple

from collections import OrderedDict

import numpy as np

from notecnn.constants import FOREST_CHECKPOINT_MAGIC, FOREST_CHECKPOINT_VERSION
from notecnn.exceptions import DataFormatError
from notecnn.helpers import sha256_hex
from notecnn.utils import read_container, write_container

from .forest import DecisionTree, RandomForest

_NODE_ARRAYS = ("feature", "threshold", "left", "right", "counts")


def feature_hash(features: Sequence[str]) -> str:
    return sha256_hex("\n".join(features).encode("utf-8"))


def save_forest(path: str, forest: RandomForest, features: Sequence[str], provenance: Optional[Dict[str, Any]] = None) -> None:
    """NCRF file: hyperparameters and the feature-list hash in the header, all trees' node arrays concatenated after it."""
    offsets = np.cumsum([0] + [tree.n_nodes for tree in forest.trees])
    arrays = OrderedDict(tree_offsets=offsets)
    for name in _NODE_ARRAYS:
        arrays[name] = np.concatenate([getattr(tree, name) for tree in forest.trees])
    header = {
        "n_trees": forest.n_trees,
        "n_features": forest.n_features,
        "max_depth": forest.max_depth,
        "min_leaf": forest.min_leaf,
        "features_per_split": forest.features_per_split,
        "bootstrap": forest.bootstrap,
        "seed": forest.seed,
        "feature_hash": feature_hash(features),
        "provenance": provenance or {},
    }
    write_container(path, FOREST_CHECKPOINT_MAGIC, FOREST_CHECKPOINT_VERSION, header, arrays)


def load_forest(path: str, features: Optional[Sequence[str]] = None) -> Tuple[RandomForest, Dict[str, Any]]:
    """Read an NCRF file; with ``features`` given, the stored feature-list hash must match."""
    header, arrays = read_container(path, FOREST_CHECKPOINT_MAGIC, FOREST_CHECKPOINT_VERSION)
    if list(arrays.keys()) != ["tree_offsets", *_NODE_ARRAYS]:
        raise DataFormatError(f"unexpected arrays {list(arrays.keys())}", path=path)
    if features is not None and feature_hash(features) != header.get("feature_hash"):
        raise DataFormatError("forest was trained on a different feature list", path=path)
    offsets = arrays["tree_offsets"]
    if offsets.shape[0] != header["n_trees"] + 1 or offsets[-1] != arrays["feature"].shape[0]:
        raise DataFormatError("tree offsets do not match the node arrays", path=path)
    trees = []
    for start, end in zip(offsets[:-1], offsets[1:]):
        trees.append(DecisionTree(**{name: arrays[name][start:end].copy() for name in _NODE_ARRAYS}))
    for tree in trees:
        internal = tree.feature[tree.feature >= 0]
        if internal.size and internal.max() >= header["n_features"]:
            raise DataFormatError("split feature index out of range", path=path)
    forest = RandomForest(
        trees=trees,
        n_features=header["n_features"],
        max_depth=header["max_depth"],
        min_leaf=header["min_leaf"],
        features_per_split=header["features_per_split"],
        bootstrap=header["bootstrap"],
        seed=header["seed"],
    )
    return forest, header
