from typing import List, Optional, Sequence

import logging
import math

import numpy as np

from notecnn.exceptions import ArgumentError
from notecnn.schemas import CohortSample, DatasetSplit

logger = logging.getLogger()


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def balance_undersample(samples: Sequence[CohortSample], task: str, seed: int) -> List[CohortSample]:
    """Keep every minority-class sample and an equal-size uniform draw of the majority class.

    The result preserves input order.
    """
    positives = [i for i, s in enumerate(samples) if s.label(task)]
    negatives = [i for i, s in enumerate(samples) if not s.label(task)]
    if not positives or not negatives:
        raise ArgumentError(f"balancing needs both classes, got {len(positives)} positive and {len(negatives)} negative samples")

    keep_all, subsample = positives, negatives
    if len(negatives) < len(positives):
        logger.warning(f"Only {len(negatives)} negatives for {len(positives)} positives ({task}); subsampling positives instead")
        keep_all, subsample = negatives, positives

    chosen = _rng(seed).choice(len(subsample), size=len(keep_all), replace=False)
    kept = set(keep_all) | {subsample[i] for i in chosen.tolist()}
    return [s for i, s in enumerate(samples) if i in kept]


def make_cv_folds(train_ids: Sequence[str], k: int = 10, seed: int = 0, labels: Optional[Sequence[bool]] = None) -> List[List[str]]:
    """Partition ids into k folds whose sizes differ by at most one.

    With labels, each class is shuffled separately and the classes are dealt round-robin one after
    the other, so every fold receives its share of both classes.
    """
    if k < 1:
        raise ArgumentError(f"k must be >= 1, got {k}")
    if k > len(train_ids):
        raise ArgumentError(f"cannot make {k} folds from {len(train_ids)} ids")
    if labels is not None and len(labels) != len(train_ids):
        raise ArgumentError("labels and train ids differ in length")

    rng = _rng(seed)
    if labels is None:
        groups = [list(range(len(train_ids)))]
    else:
        groups = [[i for i, y in enumerate(labels) if y], [i for i, y in enumerate(labels) if not y]]
    order: List[int] = []
    for group in groups:
        order.extend(group[j] for j in rng.permutation(len(group)).tolist())

    folds: List[List[int]] = [[] for _ in range(k)]
    for position, index in enumerate(order):
        folds[position % k].append(index)
    return [[train_ids[i] for i in sorted(fold)] for fold in folds]


def split_holdout(samples: Sequence[CohortSample], task: str, ratio: float = 0.10, seed: int = 0, k: int = 10) -> DatasetSplit:
    """Stratified holdout of floor(ratio * class count) samples per class (at least one), then k CV folds over the rest."""
    if not 0.0 < ratio < 1.0:
        raise ArgumentError(f"ratio must lie in (0, 1), got {ratio}")
    if len(samples) < 10:
        raise ArgumentError(f"need at least 10 samples for a holdout split, got {len(samples)}")

    rng = _rng(seed)
    test_indices = set()
    for label in (True, False):
        members = [i for i, s in enumerate(samples) if s.label(task) == label]
        if not members:
            continue
        n_test = max(1, math.floor(ratio * len(members)))
        if n_test >= len(members):
            raise ArgumentError(f"class {label} has too few samples ({len(members)}) for a holdout")
        picked = rng.permutation(len(members))[:n_test]
        test_indices.update(members[j] for j in picked.tolist())

    train = [s for i, s in enumerate(samples) if i not in test_indices]
    test = [s.admission_id for i, s in enumerate(samples) if i in test_indices]
    train_ids = [s.admission_id for s in train]
    if k > len(train_ids):
        logger.warning(f"Only {len(train_ids)} training samples; using {len(train_ids)} CV folds instead of {k}")
        k = len(train_ids)
    folds = make_cv_folds(train_ids, k=k, seed=seed, labels=[s.label(task) for s in train])
    return DatasetSplit(train=train_ids, test=test, cv_folds=folds, seed=seed, task=task, ratio=ratio)
