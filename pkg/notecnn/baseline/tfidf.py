from typing import Any, Dict, Optional, Sequence, Tuple

import logging
import math
from collections import Counter

import numpy as np
from attrs import define, field
from scipy import sparse

from notecnn.exceptions import ArgumentError, DataFormatError
from notecnn.helpers import PROVENANCE_KEY, read_json, write_json

logger = logging.getLogger()


@define(frozen=True)
class TfidfModel:
    """Selected terms in rank order with their training document frequencies."""

    features: Tuple[str, ...] = field(converter=tuple)
    df: Tuple[int, ...] = field(converter=tuple)
    n_docs: int
    column: Dict[str, int] = field(init=False, repr=False, eq=False)

    def __attrs_post_init__(self):
        if len(self.features) != len(self.df):
            raise ArgumentError(f"{len(self.features)} features but {len(self.df)} document frequencies")
        if any(not 1 <= d <= self.n_docs for d in self.df):
            raise ArgumentError(f"document frequencies must lie in [1, {self.n_docs}]")
        object.__setattr__(self, "column", {term: i for i, term in enumerate(self.features)})

    @property
    def n_features(self) -> int:
        return len(self.features)

    @property
    def idf(self) -> np.ndarray:
        return np.log((1.0 + self.n_docs) / (1.0 + np.asarray(self.df, dtype=np.float64))) + 1.0


def tfidf_fit(docs: Sequence[Sequence[str]], n_features: int) -> TfidfModel:
    """Keep the ``n_features`` terms with the highest document frequency (ties lexicographic).

    >>> tfidf_fit([["a"], ["a", "b"]], 10).features
    ('a', 'b')
    """
    if not docs:
        raise ArgumentError("cannot fit TF-IDF on an empty corpus")
    if n_features < 1:
        raise ArgumentError(f"n_features must be >= 1, got {n_features}")
    df = Counter()
    for tokens in docs:
        df.update(set(tokens))
    ranked = sorted(df.items(), key=lambda item: (-item[1], item[0]))[:n_features]
    if len(ranked) < n_features:
        logger.info(f"only {len(ranked)} distinct terms available for {n_features} requested features")
    return TfidfModel(features=[t for t, _ in ranked], df=[d for _, d in ranked], n_docs=len(docs))


def tfidf_transform(docs: Sequence[Sequence[str]], model: TfidfModel) -> sparse.csr_matrix:
    """Raw count times smoothed idf, L2-normalized per row; terms outside the model are ignored."""
    idf = model.idf
    indptr = [0]
    indices = []
    values = []
    for tokens in docs:
        counts = Counter(model.column[t] for t in tokens if t in model.column)
        cols = sorted(counts)
        row = np.asarray([counts[c] for c in cols], dtype=np.float64) * idf[cols]
        norm = math.sqrt(float(np.dot(row, row)))
        if norm > 0:
            row = row / norm
        indices.extend(cols)
        values.extend(row.tolist())
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.asarray(values, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(docs), model.n_features),
    )


def save_tfidf(path: str, model: TfidfModel, provenance: Optional[Dict[str, Any]] = None) -> None:
    write_json(path, {"features": list(model.features), "df": list(model.df), "n_docs": model.n_docs}, provenance=provenance)


def load_tfidf(path: str) -> TfidfModel:
    data = read_json(path)
    data.pop(PROVENANCE_KEY, None)
    try:
        return TfidfModel(features=data["features"], df=data["df"], n_docs=data["n_docs"])
    except (KeyError, ArgumentError) as e:
        raise DataFormatError(f"invalid TF-IDF model: {e}", path=path) from e
