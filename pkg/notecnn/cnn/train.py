from typing import List, Optional, Sequence, Tuple

import logging

import numpy as np
from attrs import define

from notecnn.evals.metrics import evaluate
from notecnn.exceptions import ArgumentError, NumericError
from notecnn.helpers import progress
from notecnn.run_logger import RunLogger
from notecnn.schemas import CnnConfig, MetricReport
from notecnn.textprep import EmbeddingTable, EncodedNote

from .model import CnnModel, init_model, loss_and_gradients, predict_scores
from .optim import Adam

logger = logging.getLogger()

LabeledNotes = Sequence[Tuple[EncodedNote, bool]]

_SEED_BOUND = 2**32


@define
class TrainingLogEntry:
    epoch: int
    train_loss: float
    precision: float
    recall: float
    f1: float
    accuracy: float
    is_best: bool
    fold: Optional[int] = None


@define
class TrainingResult:
    model: CnnModel
    log: List[TrainingLogEntry]
    best_epoch: int
    best_f1: float
    fold: Optional[int] = None


def validation_report(model: CnnModel, validation_set: LabeledNotes) -> MetricReport:
    _, labels = predict_scores([note for note, _ in validation_set], model)
    return evaluate(list(labels), [bool(label) for _, label in validation_set])


def _stream(seed: int, fold: Optional[int]) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed if fold is None else [seed, fold]))


def train(
    train_set: LabeledNotes,
    validation_set: LabeledNotes,
    embedding: EmbeddingTable,
    config: CnnConfig,
    run_logger: Optional[RunLogger] = None,
    fold: Optional[int] = None,
) -> TrainingResult:
    """Mini-batch Adam training with best-validation-F1 model retention and early stopping.

    Initialization, shuffling and dropout masks are all drawn from one PCG64 stream seeded by
    ``config.train.seed`` (and the fold index, if any), so a fixed config reproduces the final
    parameters exactly.

    Args:
        train_set: (encoded note, label) pairs used for parameter updates.
        validation_set: pairs scored after every epoch to pick the retained model.
        embedding: initial embedding table; the model trains a copy of it.
        config: architecture and training hyperparameters.
        run_logger: receives one record per epoch.
        fold: CV fold index, recorded in the log and mixed into the random stream.

    Returns:
        TrainingResult: the best model with its per-epoch log.

    Raises:
        ArgumentError: empty train or validation set.
        NumericError: the loss or the parameters became non-finite.
    """
    tc = config.train
    if tc.epochs < 1:
        raise ArgumentError(f"epochs must be >= 1, got {tc.epochs}")
    if not train_set or not validation_set:
        raise ArgumentError("train and validation sets must be nonempty")

    rng = _stream(tc.seed, fold)
    model = init_model(
        embedding,
        widths=config.widths,
        filters_per_width=config.filters_per_width,
        dropout_rate=tc.dropout_rate,
        seed=int(rng.integers(_SEED_BOUND)),
    )
    optimizer = Adam(
        learning_rate=tc.learning_rate,
        beta1=tc.beta1,
        beta2=tc.beta2,
        epsilon=tc.epsilon,
        frozen=() if tc.fine_tune_embeddings else ("embedding",),
    )

    best, best_f1, best_epoch, stale = model.copy(), -1.0, 0, 0
    log: List[TrainingLogEntry] = []
    n = len(train_set)
    for epoch in progress(range(1, tc.epochs + 1), desc=f"cnn fold {fold}" if fold is not None else "cnn", unit="epoch"):
        order = rng.permutation(n)
        total_loss = 0.0
        try:
            for start in range(0, n, tc.batch_size):
                batch = [train_set[i] for i in order[start : start + tc.batch_size]]
                loss, grads = loss_and_gradients(batch, model, seed=int(rng.integers(_SEED_BOUND)), fine_tune_embeddings=tc.fine_tune_embeddings)
                optimizer.step(model.parameters(), grads)
                total_loss += loss * len(batch)
            for name, value in model.parameters().items():
                if not np.all(np.isfinite(value)):
                    raise NumericError("parameters diverged", location=name)
            report = validation_report(model, validation_set)
        except NumericError as e:
            raise NumericError("training diverged", location=e.location, epoch=epoch) from e

        improved = report.f1 > best_f1
        if improved:
            best, best_f1, best_epoch, stale = model.copy(), report.f1, epoch, 0
        else:
            stale += 1
        entry = TrainingLogEntry(
            epoch=epoch,
            train_loss=total_loss / n,
            precision=report.precision,
            recall=report.recall,
            f1=report.f1,
            accuracy=report.accuracy,
            is_best=improved,
            fold=fold,
        )
        log.append(entry)
        if run_logger is not None:
            run_logger.record_log(entry)
        logger.info(f"epoch {epoch}: loss={entry.train_loss:.4f} val_f1={report.f1:.4f}{' *' if improved else ''}")
        if stale >= tc.early_stop_patience:
            logger.info(f"early stop after {epoch} epochs, best epoch {best_epoch}")
            break

    return TrainingResult(model=best, log=log, best_epoch=best_epoch, best_f1=best_f1, fold=fold)


def cross_validate(
    samples: LabeledNotes,
    folds: Sequence[Sequence[int]],
    embedding: EmbeddingTable,
    config: CnnConfig,
    run_logger: Optional[RunLogger] = None,
) -> TrainingResult:
    """Train one model per fold (validate on the fold, train on the rest) and keep the best.

    ``folds`` hold indices into ``samples``. The winner has the highest validation F1, ties going
    to the lower fold index; ``config.max_folds`` limits how many folds are trained.
    """
    if not folds:
        raise ArgumentError("at least one fold is required")
    n_folds = len(folds) if config.max_folds is None else min(config.max_folds, len(folds))
    best: Optional[TrainingResult] = None
    for fold in range(n_folds):
        held_out = set(folds[fold])
        validation_set = [samples[i] for i in folds[fold]]
        train_set = [samples[i] for i in range(len(samples)) if i not in held_out]
        result = train(train_set, validation_set, embedding, config, run_logger=run_logger, fold=fold)
        logger.info(f"fold {fold}: best validation F1 {result.best_f1:.4f} at epoch {result.best_epoch}")
        if best is None or result.best_f1 > best.best_f1:
            best = result
    return best
