from typing import List, Optional

from attrs import define, field

from notecnn.constants import (
    DEFAULT_EMBEDDING_DIM,
    DEFAULT_FEATURE_COUNTS,
    DEFAULT_FREQUENCY_MASK,
    DEFAULT_N_MAX,
    DEFAULT_TOP_K_FEATURES,
    MODEL_BOTH,
    MODEL_CNN,
    MODEL_RF,
    NOTECNN_N_WORKERS,
    TASK_GENERAL,
    TASKS,
)
from notecnn.exceptions import ArgumentError


def at_least(bound):
    def _check(instance, attribute, value):
        if value is not None and value < bound:
            raise ArgumentError(f"{attribute.name} must be >= {bound}, got {value}")

    return _check


def greater_than(bound):
    def _check(instance, attribute, value):
        if value is not None and not value > bound:
            raise ArgumentError(f"{attribute.name} must be > {bound}, got {value}")

    return _check


def unit_interval(instance, attribute, value):
    if not 0.0 <= value <= 1.0:
        raise ArgumentError(f"{attribute.name} must lie in [0, 1], got {value}")


def half_open_unit_interval(instance, attribute, value):
    if not 0.0 <= value < 1.0:
        raise ArgumentError(f"{attribute.name} must lie in [0, 1), got {value}")


def one_of(*choices):
    def _check(instance, attribute, value):
        if value not in choices:
            raise ArgumentError(f"{attribute.name} must be one of {', '.join(choices)}, got {value!r}")

    return _check


@define
class TrainConfig:
    epochs: int = field(default=10, validator=at_least(1))
    batch_size: int = field(default=50, validator=at_least(1))
    learning_rate: float = field(default=1e-3, validator=greater_than(0.0))
    seed: int = 42
    early_stop_patience: int = field(default=3, validator=at_least(1))
    dropout_rate: float = field(default=0.5, validator=half_open_unit_interval)
    fine_tune_embeddings: bool = True
    # adaptive moment estimation constants
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


@define
class CnnConfig:
    widths: List[int] = field(factory=lambda: [1, 2, 3])
    filters_per_width: int = field(default=100, validator=at_least(1))
    # number of CV folds trained for model selection; None trains every fold
    max_folds: Optional[int] = field(default=None, validator=at_least(1))
    train: TrainConfig = field(factory=TrainConfig)


@define
class ForestConfig:
    n_trees: int = field(default=100, validator=at_least(1))
    max_depth: Optional[int] = field(default=None, validator=at_least(1))
    min_leaf: int = field(default=1, validator=at_least(1))
    # None means ceil(sqrt(N_feat))
    features_per_split: Optional[int] = field(default=None, validator=at_least(1))
    bootstrap: bool = True
    feature_counts: List[int] = field(factory=lambda: list(DEFAULT_FEATURE_COUNTS))
    max_folds: Optional[int] = field(default=None, validator=at_least(1))
    n_workers: int = field(default=NOTECNN_N_WORKERS, validator=at_least(1))


@define
class CohortConfig:
    holdout_ratio: float = 0.10
    cv_folds: int = field(default=10, validator=at_least(2))


@define
class TextConfig:
    n_max: int = field(default=DEFAULT_N_MAX, validator=at_least(1))
    vocab_max_size: Optional[int] = field(default=None, validator=at_least(1))
    embedding_dim: int = field(default=DEFAULT_EMBEDDING_DIM, validator=at_least(1))
    stopwords_path: Optional[str] = None


@define
class ExplainConfig:
    k: int = field(default=DEFAULT_TOP_K_FEATURES, validator=at_least(1))
    # None disables masking
    top_k_mask: Optional[int] = field(default=DEFAULT_FREQUENCY_MASK, validator=at_least(1))
    model: str = field(default=MODEL_CNN, validator=one_of(MODEL_CNN, MODEL_RF))
    include_train: bool = False


@define
class SynthConfig:
    n_patients: int = field(default=1000, validator=at_least(1))
    min_admissions: int = field(default=1, validator=at_least(1))
    max_admissions: int = field(default=4, validator=at_least(1))
    # chance that a non-final admission is followed by another within 30 days
    readmit_30day_rate: float = field(default=0.3, validator=unit_interval)
    min_note_length: int = field(default=80, validator=at_least(1))
    max_note_length: int = field(default=200, validator=at_least(1))
    signal_tokens_pos: List[str] = field(factory=lambda: ["furosemidex", "bipapx", "readmitx"])
    signal_tokens_neg: List[str] = field(factory=lambda: ["postopx", "cathlabx", "stablex"])
    signal_probability: float = field(default=0.9, validator=unit_interval)
    signal_task: str = field(default=TASK_GENERAL, validator=one_of(*TASKS))
    background_vocab_size: int = field(default=2000, validator=at_least(1))
    zipf_exponent: float = field(default=1.1, validator=greater_than(0.0))
    missing_summary_rate: float = field(default=0.0, validator=unit_interval)
    other_note_rate: float = field(default=0.3, validator=unit_interval)
    max_extra_codes: int = field(default=3, validator=at_least(0))
    seed: int = 0


@define
class PathsConfig:
    output_dir: str = "out"
    # default to <output_dir>/admissions.jsonl and <output_dir>/notes.jsonl
    admissions: Optional[str] = None
    notes: Optional[str] = None
    embeddings: Optional[str] = None


@define
class ExperimentConfig:
    paths: PathsConfig = field(factory=PathsConfig)
    task: str = field(default=TASK_GENERAL, validator=one_of(*TASKS))
    model: str = field(default=MODEL_BOTH, validator=one_of(MODEL_CNN, MODEL_RF, MODEL_BOTH))
    seed: int = 42
    allow_train_eval: bool = False
    cohort: CohortConfig = field(factory=CohortConfig)
    text: TextConfig = field(factory=TextConfig)
    cnn: CnnConfig = field(factory=CnnConfig)
    forest: ForestConfig = field(factory=ForestConfig)
    explain: ExplainConfig = field(factory=ExplainConfig)
    synth: SynthConfig = field(factory=SynthConfig)
