from typing import List, Optional, Sequence, Tuple

import logging

from attrs import define

from notecnn.evals.metrics import evaluate
from notecnn.exceptions import ArgumentError
from notecnn.run_logger import RunLogger
from notecnn.schemas import ForestConfig, MetricReport

from .forest import RandomForest, rf_predict, rf_train
from .tfidf import TfidfModel, tfidf_fit, tfidf_transform

logger = logging.getLogger()

Docs = Sequence[Sequence[str]]


@define
class SweepLogEntry:
    n_features: int
    precision: float
    recall: float
    f1: float
    accuracy: float
    fold: Optional[int] = None


@define
class SweepResult:
    tfidf: TfidfModel
    forest: RandomForest
    n_features: int
    report: MetricReport
    fold: Optional[int] = None

    def rank_key(self):
        return -self.report.f1, self.n_features, self.fold if self.fold is not None else -1


def fit_baseline(docs: Docs, labels: Sequence[bool], n_features: int, config: ForestConfig, seed: int) -> Tuple[TfidfModel, RandomForest]:
    tfidf = tfidf_fit(docs, n_features)
    forest = rf_train(
        tfidf_transform(docs, tfidf),
        labels,
        n_trees=config.n_trees,
        seed=seed,
        max_depth=config.max_depth,
        min_leaf=config.min_leaf,
        features_per_split=config.features_per_split,
        bootstrap=config.bootstrap,
        n_workers=config.n_workers,
    )
    return tfidf, forest


def predict_docs(docs: Docs, tfidf: TfidfModel, forest: RandomForest):
    return rf_predict(tfidf_transform(docs, tfidf), forest)


def sweep_features(
    train_docs: Docs,
    train_labels: Sequence[bool],
    validation_docs: Docs,
    validation_labels: Sequence[bool],
    feature_counts: Sequence[int],
    config: ForestConfig,
    seed: int = 0,
    run_logger: Optional[RunLogger] = None,
    fold: Optional[int] = None,
) -> SweepResult:
    """Fit TF-IDF + forest once per feature count and keep the best validation F1, ties going to fewer features."""
    if not feature_counts:
        raise ArgumentError("feature_counts must not be empty")
    best: Optional[SweepResult] = None
    for n_features in sorted(set(feature_counts)):
        tfidf, forest = fit_baseline(train_docs, train_labels, n_features, config, seed)
        predicted, _ = predict_docs(validation_docs, tfidf, forest)
        report = evaluate(list(predicted), list(validation_labels))
        entry = SweepLogEntry(
            n_features=n_features,
            precision=report.precision,
            recall=report.recall,
            f1=report.f1,
            accuracy=report.accuracy,
            fold=fold,
        )
        if run_logger is not None:
            run_logger.record_log(entry)
        logger.info(f"rf sweep fold={fold} n_features={n_features}: val_f1={report.f1:.4f}")
        result = SweepResult(tfidf=tfidf, forest=forest, n_features=n_features, report=report, fold=fold)
        if best is None or result.rank_key() < best.rank_key():
            best = result
    return best


def sweep_folds(
    docs: Docs,
    labels: Sequence[bool],
    folds: Sequence[Sequence[int]],
    config: ForestConfig,
    seed: int = 0,
    run_logger: Optional[RunLogger] = None,
) -> SweepResult:
    """Run the feature sweep on each CV fold (``folds`` index into ``docs``) and keep the best (fold, feature count).

    Ranking is validation F1, then fewer features, then the lower fold index.
    """
    if not folds:
        raise ArgumentError("at least one fold is required")
    n_folds = len(folds) if config.max_folds is None else min(config.max_folds, len(folds))
    results: List[SweepResult] = []
    for fold in range(n_folds):
        held_out = set(folds[fold])
        train_idx = [i for i in range(len(docs)) if i not in held_out]
        results.append(
            sweep_features(
                [docs[i] for i in train_idx],
                [labels[i] for i in train_idx],
                [docs[i] for i in folds[fold]],
                [labels[i] for i in folds[fold]],
                config.feature_counts,
                config,
                seed=seed,
                run_logger=run_logger,
                fold=fold,
            )
        )
    return min(results, key=SweepResult.rank_key)
