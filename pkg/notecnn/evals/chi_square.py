from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor

from attrs import define, field

from notecnn.constants import DEFAULT_TOP_K_FEATURES, NOTECNN_N_WORKERS
from notecnn.exceptions import ArgumentError
from notecnn.helpers import write_rows_to_csv
from notecnn.schemas import ContingencyTable, FeatureScore

logger = logging.getLogger()

FEATURE_COLUMNS = ("term", "chi2", "o_yes_pos", "o_yes_neg", "o_no_pos", "o_no_neg")


@define(frozen=True)
class LabeledDoc:
    doc_id: str
    tokens: Tuple[str, ...] = field(converter=tuple)
    label: bool


def filter_correct(samples: Sequence[LabeledDoc], predictions: Sequence[bool]) -> List[LabeledDoc]:
    """Samples whose prediction equals their true label, in input order."""
    if len(samples) != len(predictions):
        raise ArgumentError(f"{len(samples)} samples but {len(predictions)} predictions")
    return [s for s, p in zip(samples, predictions) if bool(p) == bool(s.label)]


def _class_sizes(samples: Sequence[LabeledDoc]) -> Tuple[int, int]:
    if not samples:
        raise ArgumentError("chi-square scoring needs a nonempty sample set")
    n_pos = sum(1 for s in samples if s.label)
    n_neg = len(samples) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ArgumentError(f"chi-square scoring needs both classes, got {n_pos} positive and {n_neg} negative")
    return n_pos, n_neg


def contingency_table(term: str, samples: Sequence[LabeledDoc]) -> ContingencyTable:
    yes_pos = sum(1 for s in samples if s.label and term in s.tokens)
    yes_neg = sum(1 for s in samples if not s.label and term in s.tokens)
    n_pos = sum(1 for s in samples if s.label)
    return ContingencyTable(o_yes_pos=yes_pos, o_yes_neg=yes_neg, o_no_pos=n_pos - yes_pos, o_no_neg=len(samples) - n_pos - yes_neg)


def chi2_statistic(table: ContingencyTable) -> float:
    """Sum of (O - E)^2 / E over the four cells; cells with E = 0 contribute nothing.

    >>> chi2_statistic(ContingencyTable(o_yes_pos=30, o_yes_neg=10, o_no_pos=70, o_no_neg=90))
    12.5
    """
    total = 0.0
    for observed, expected in zip(table.observed, table.expected):
        if expected > 0:
            total += (observed - expected) ** 2 / expected
    return total


def chi2_score(term: str, samples: Sequence[LabeledDoc]) -> FeatureScore:
    _class_sizes(samples)
    table = contingency_table(term, samples)
    return FeatureScore(term=term, chi2=chi2_statistic(table), table=table)


def _score_chunk(terms: Sequence[str], df_pos: Dict[str, int], df_neg: Dict[str, int], n_pos: int, n_neg: int) -> List[FeatureScore]:
    scores = []
    for term in terms:
        yes_pos, yes_neg = df_pos.get(term, 0), df_neg.get(term, 0)
        table = ContingencyTable(o_yes_pos=yes_pos, o_yes_neg=yes_neg, o_no_pos=n_pos - yes_pos, o_no_neg=n_neg - yes_neg)
        scores.append(FeatureScore(term=term, chi2=chi2_statistic(table), table=table))
    return scores


def score_all(samples: Sequence[LabeledDoc], vocabulary: Optional[Iterable[str]] = None, n_workers: int = NOTECNN_N_WORKERS) -> List[FeatureScore]:
    """Score every term (by default every term occurring in ``samples``), ranked by chi-square desc then term asc.

    Terms are scored in chunks on a thread pool; the final sort makes the order independent of scheduling.
    """
    n_pos, n_neg = _class_sizes(samples)
    df_pos: Counter = Counter()
    df_neg: Counter = Counter()
    for s in samples:
        (df_pos if s.label else df_neg).update(set(s.tokens))
    terms: Set[str] = set(vocabulary) if vocabulary is not None else set(df_pos) | set(df_neg)
    ordered = sorted(terms)
    chunk = max(1, -(-len(ordered) // max(1, n_workers)))
    with ThreadPoolExecutor(max_workers=max(1, n_workers)) as executor:
        parts = executor.map(lambda start: _score_chunk(ordered[start : start + chunk], df_pos, df_neg, n_pos, n_neg), range(0, len(ordered), chunk))
        scores = [score for part in parts for score in part]
    return sorted(scores, key=lambda s: (-s.chi2, s.term))


def top_k_features(samples: Sequence[LabeledDoc], k: int = DEFAULT_TOP_K_FEATURES, n_workers: int = NOTECNN_N_WORKERS) -> List[FeatureScore]:
    if k < 1:
        raise ArgumentError(f"k must be >= 1, got {k}")
    return score_all(samples, n_workers=n_workers)[:k]


def feature_rows(scores: Iterable[FeatureScore]) -> List[Dict[str, object]]:
    return [
        {
            "term": s.term,
            "chi2": repr(s.chi2),
            "o_yes_pos": s.table.o_yes_pos,
            "o_yes_neg": s.table.o_yes_neg,
            "o_no_pos": s.table.o_no_pos,
            "o_no_neg": s.table.o_no_neg,
        }
        for s in scores
    ]


def write_feature_report(path: str, scores: Iterable[FeatureScore], provenance: Optional[Dict[str, object]] = None) -> None:
    write_rows_to_csv(path, FEATURE_COLUMNS, feature_rows(scores), provenance=provenance)
