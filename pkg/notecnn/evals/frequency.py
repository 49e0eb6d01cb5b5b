from typing import Dict, Iterable, List, Optional, Sequence, Set

from collections import Counter

from notecnn.constants import DEFAULT_FREQUENCY_MASK
from notecnn.exceptions import ArgumentError
from notecnn.helpers import write_rows_to_csv
from notecnn.schemas import FrequencyRow

from .chi_square import LabeledDoc

FREQUENCY_COLUMNS = ("term", "count_pos", "count_neg", "n_pos", "n_neg")


def top_terms(counts: Counter, k: int) -> Set[str]:
    """The ``k`` most frequent terms with a nonzero count, ties broken lexicographically."""
    ranked = sorted((t for t, c in counts.items() if c > 0), key=lambda t: (-counts[t], t))
    return set(ranked[:k])


def frequency_report(terms: Sequence[str], samples: Sequence[LabeledDoc], top_k_mask: Optional[int] = DEFAULT_FREQUENCY_MASK) -> List[FrequencyRow]:
    """Total token occurrences of each term per class.

    A class's count is masked (None) when the term is outside that class's ``top_k_mask`` most
    frequent terms; ``top_k_mask=None`` disables masking.
    """
    if top_k_mask is not None and top_k_mask < 1:
        raise ArgumentError(f"top_k_mask must be >= 1, got {top_k_mask}")
    if not terms:
        return []
    pos: Counter = Counter()
    neg: Counter = Counter()
    for s in samples:
        (pos if s.label else neg).update(s.tokens)
    n_pos = sum(1 for s in samples if s.label)
    n_neg = len(samples) - n_pos
    top_pos = top_terms(pos, top_k_mask) if top_k_mask is not None else None
    top_neg = top_terms(neg, top_k_mask) if top_k_mask is not None else None
    return [
        FrequencyRow(
            term=term,
            count_pos=pos[term] if top_pos is None or term in top_pos else None,
            count_neg=neg[term] if top_neg is None or term in top_neg else None,
            n_pos=n_pos,
            n_neg=n_neg,
        )
        for term in terms
    ]


def frequency_rows(rows: Iterable[FrequencyRow], top_k_mask: Optional[int] = DEFAULT_FREQUENCY_MASK) -> List[Dict[str, object]]:
    masked = f"non-top{top_k_mask}"
    return [
        {
            "term": r.term,
            "count_pos": masked if r.count_pos is None else r.count_pos,
            "count_neg": masked if r.count_neg is None else r.count_neg,
            "n_pos": r.n_pos,
            "n_neg": r.n_neg,
        }
        for r in rows
    ]


def write_frequency_report(path: str, rows: Iterable[FrequencyRow], top_k_mask: Optional[int] = DEFAULT_FREQUENCY_MASK, provenance: Optional[Dict[str, object]] = None) -> None:
    write_rows_to_csv(path, FREQUENCY_COLUMNS, frequency_rows(rows, top_k_mask), provenance=provenance)
