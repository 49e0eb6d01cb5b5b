from typing import Any, Dict, List, Optional, Sequence, Tuple

import logging
import os

from notecnn.baseline import TfidfModel, load_forest, load_tfidf, predict_docs, save_forest, save_tfidf, sweep_folds
from notecnn.cnn import cross_validate, load_checkpoint, predict, save_checkpoint
from notecnn.cohort import balance_undersample, build_cohort, cohort_stats, read_admissions, read_cohort, read_split, split_holdout, write_cohort, write_split
from notecnn.cohort.io import default_input_paths
from notecnn.constants import MODEL_BOTH, MODEL_CNN, MODEL_RF, TASKS
from notecnn.evals import LabeledDoc, evaluate, filter_correct, format_table, frequency_report, top_k_features, write_feature_report, write_frequency_report
from notecnn.exceptions import ArgumentError, DataFormatError
from notecnn.helpers import hash_file, hash_ids, read_jsonl, write_json, write_jsonl
from notecnn.run_logger import RunLogger
from notecnn.schemas import CohortSample, DatasetSplit, ExperimentConfig, MetricReport
from notecnn.synth import SynthResult, generate
from notecnn.textprep import build_vocab, encode, load_embeddings, load_stopwords, save_encoded, tokenize
from notecnn.utils.universal_encoder import json_dumps

from .config import config_to_dict, output_path, provenance

logger = logging.getLogger()

COHORT_FILE = "cohort.jsonl"
COHORT_STATS_FILE = "cohort_stats.json"
CNN_CHECKPOINT_FILE = "cnn.ncnm"
CNN_LOG_FILE = "cnn_train_log.jsonl"
ENCODED_TRAIN_FILE = "train.ncnn"
TFIDF_FILE = "tfidf.json"
FOREST_CHECKPOINT_FILE = "rf.ncrf"
RF_LOG_FILE = "rf_sweep_log.jsonl"
PARTITION_TEST = "test"
PARTITION_TRAIN = "train"


def split_file(task: str) -> str:
    return f"split_{task}.json"


def selected_models(config: ExperimentConfig) -> List[str]:
    return [MODEL_CNN, MODEL_RF] if config.model == MODEL_BOTH else [config.model]


def default_checkpoint(config: ExperimentConfig, model: str) -> str:
    return output_path(config, config.task, CNN_CHECKPOINT_FILE if model == MODEL_CNN else FOREST_CHECKPOINT_FILE)


def _tokenized(samples: Sequence[CohortSample], stopwords_path: Optional[str]) -> List[List[str]]:
    stopwords = load_stopwords(stopwords_path)
    return [tokenize(s.note_text, stopwords) for s in samples]


def _fold_indices(split: DatasetSplit, samples: Sequence[CohortSample]) -> List[List[int]]:
    position = {s.admission_id: i for i, s in enumerate(samples)}
    return [[position[admission_id] for admission_id in fold] for fold in split.cv_folds]


def cmd_synth(config: ExperimentConfig) -> SynthResult:
    result = generate(config.synth, config.paths.output_dir, provenance=provenance(config))
    print(f"Synthetic dataset written to {config.paths.output_dir}:\n{json_dumps(result, indent=2)}\n")
    return result


def cmd_cohort(config: ExperimentConfig) -> Dict[str, Any]:
    """Label the heart-failure cohort, write it with its cohort statistics, and write one balanced split per task."""
    out = config.paths.output_dir
    os.makedirs(out, exist_ok=True)
    admissions_path, notes_path = default_input_paths(out, config.paths.admissions, config.paths.notes)
    admissions = read_admissions(admissions_path, notes_path)
    stats = cohort_stats(admissions)
    samples = build_cohort(admissions)
    if not samples:
        raise DataFormatError("no heart-failure admission with a discharge summary; the cohort is empty", path=admissions_path)

    prov = provenance(config)
    write_cohort(output_path(config, COHORT_FILE), samples, prov)
    write_json(output_path(config, COHORT_STATS_FILE), {"rows": stats.rows(), "stats": stats}, prov)

    splits: Dict[str, Dict[str, int]] = {}
    for task in TASKS:
        try:
            balanced = balance_undersample(samples, task, seed=config.seed)
            split = split_holdout(balanced, task, ratio=config.cohort.holdout_ratio, seed=config.seed, k=config.cohort.cv_folds)
        except ArgumentError as e:
            if task == config.task:
                raise
            logger.warning(f"no split for task {task}: {e}")
            continue
        write_split(output_path(config, split_file(task)), split, prov)
        splits[task] = {"train": len(split.train), "test": len(split.test), "folds": len(split.cv_folds)}

    print("Heart failure cohort (admissions / with discharge summaries):")
    for row in stats.rows():
        print(f"  {row['row']:<45} {row['admissions']:>8} {row['with_summaries']:>8}")
    print(f"Splits:\n{json_dumps(splits, indent=2)}\n")
    return {"samples": len(samples), "stats": stats, "splits": splits}


def _load_train_partition(config: ExperimentConfig) -> Tuple[str, DatasetSplit, List[CohortSample]]:
    path = output_path(config, split_file(config.task))
    split = read_split(path)
    if split.task is not None and split.task != config.task:
        raise DataFormatError(f"split is for task {split.task}, config asks for {config.task}", path=path)
    by_id = {s.admission_id: s for s in read_cohort(output_path(config, COHORT_FILE), ids=split.train)}
    return path, split, [by_id[admission_id] for admission_id in split.train]


def _train_cnn(config: ExperimentConfig, tokens: List[List[str]], labels: List[bool], folds: List[List[int]], prov: Dict[str, Any]) -> str:
    max_width = max(config.cnn.widths)
    if config.text.n_max < max_width:
        raise ArgumentError(f"n_max {config.text.n_max} is shorter than the widest filter ({max_width})")
    vocab = build_vocab(tokens, config.text.vocab_max_size)
    embedding = load_embeddings(config.paths.embeddings, vocab, config.text.embedding_dim, seed=config.seed)
    encoded = [encode(t, vocab, config.text.n_max) for t in tokens]
    task_dir = output_path(config, config.task)
    save_encoded(os.path.join(task_dir, ENCODED_TRAIN_FILE), encoded, labels, prov)

    run_logger = RunLogger(path=os.path.join(task_dir, CNN_LOG_FILE), provenance=prov)
    result = cross_validate(list(zip(encoded, labels)), folds, embedding, config.cnn, run_logger=run_logger)
    echo = {"text": config_to_dict(config)["text"], "cnn": config_to_dict(config)["cnn"], "task": config.task}
    path = os.path.join(task_dir, CNN_CHECKPOINT_FILE)
    save_checkpoint(path, result.model, config_echo=echo, provenance=prov)
    logger.info(f"cnn: best validation F1 {result.best_f1:.4f} (fold {result.fold}, epoch {result.best_epoch})")
    return path


def _train_rf(config: ExperimentConfig, tokens: List[List[str]], labels: List[bool], folds: List[List[int]], prov: Dict[str, Any]) -> str:
    task_dir = output_path(config, config.task)
    run_logger = RunLogger(path=os.path.join(task_dir, RF_LOG_FILE), provenance=prov)
    best = sweep_folds(tokens, labels, folds, config.forest, seed=config.seed, run_logger=run_logger)
    save_tfidf(os.path.join(task_dir, TFIDF_FILE), best.tfidf, provenance=prov)
    path = os.path.join(task_dir, FOREST_CHECKPOINT_FILE)
    save_forest(path, best.forest, best.tfidf.features, provenance={**prov, "text": config_to_dict(config)["text"], "task": config.task})
    logger.info(f"rf: best validation F1 {best.report.f1:.4f} with {best.n_features} features (fold {best.fold})")
    return path


def cmd_train(config: ExperimentConfig) -> Dict[str, str]:
    """Train the selected model(s) on the 90% partition with CV-based model selection; the test ids are never loaded."""
    split_path, split, samples = _load_train_partition(config)
    os.makedirs(output_path(config, config.task), exist_ok=True)
    prov = {
        **provenance(config),
        "task": config.task,
        "split_hash": hash_file(split_path),
        "train_ids_hash": hash_ids(split.train),
    }
    tokens = _tokenized(samples, config.text.stopwords_path)
    labels = [s.label(config.task) for s in samples]
    folds = _fold_indices(split, samples)

    checkpoints: Dict[str, str] = {}
    for model in selected_models(config):
        trainer = _train_cnn if model == MODEL_CNN else _train_rf
        checkpoints[model] = trainer(config, tokens, labels, folds, prov)
    print(f"Checkpoints for task {config.task}:\n{json_dumps(checkpoints, indent=2)}\n")
    return checkpoints


def _check_split_provenance(config: ExperimentConfig, header_provenance: Dict[str, Any], checkpoint: str) -> Tuple[str, DatasetSplit]:
    path = output_path(config, split_file(config.task))
    split = read_split(path)
    if header_provenance.get("split_hash") != hash_file(path):
        raise DataFormatError(f"checkpoint was trained on a different split than {path}", path=checkpoint)
    if header_provenance.get("task") != config.task:
        raise DataFormatError(f"checkpoint is for task {header_provenance.get('task')}, config asks for {config.task}", path=checkpoint)
    return path, split


def _cnn_predictor(checkpoint: str):
    model, header = load_checkpoint(checkpoint)
    text = header["config"]["text"]

    def run(samples: Sequence[CohortSample]) -> List[Tuple[float, bool]]:
        notes = [encode(t, model.vocab, text["n_max"]) for t in _tokenized(samples, text["stopwords_path"])]
        return predict(notes, model)

    return run, header["provenance"]


def _rf_predictor(checkpoint: str):
    tfidf: TfidfModel = load_tfidf(os.path.join(os.path.dirname(checkpoint), TFIDF_FILE))
    forest, header = load_forest(checkpoint, features=tfidf.features)
    text = header["provenance"]["text"]

    def run(samples: Sequence[CohortSample]) -> List[Tuple[float, bool]]:
        labels, proba = predict_docs(_tokenized(samples, text["stopwords_path"]), tfidf, forest)
        return [(float(p), bool(y)) for p, y in zip(proba, labels)]

    return run, header["provenance"]


def load_predictor(model: str, checkpoint: str):
    """A ``samples -> [(probability, label)]`` callable for a saved model, plus the checkpoint's provenance."""
    if not os.path.exists(checkpoint):
        raise FileNotFoundError(f"No such checkpoint: {checkpoint}")
    return _cnn_predictor(checkpoint) if model == MODEL_CNN else _rf_predictor(checkpoint)


def _resolve_checkpoint(config: ExperimentConfig, model: str, checkpoint: Optional[str]) -> str:
    if checkpoint is not None and config.model == MODEL_BOTH:
        raise ArgumentError("--checkpoint needs --model cnn or --model rf")
    return checkpoint or default_checkpoint(config, model)


def predictions_file(model: str, partition: str = PARTITION_TEST) -> str:
    suffix = "" if partition == PARTITION_TEST else f"_{partition}"
    return f"predictions_{model}{suffix}.jsonl"


def cmd_evaluate(config: ExperimentConfig, checkpoint: Optional[str] = None, partition: str = PARTITION_TEST) -> List[MetricReport]:
    """Score the saved model(s) on the holdout and print a Prec/Rec/F1/Acc table.

    Evaluating the training partition is refused unless ``allow_train_eval`` is set.
    """
    if partition not in (PARTITION_TEST, PARTITION_TRAIN):
        raise ArgumentError(f"partition must be '{PARTITION_TEST}' or '{PARTITION_TRAIN}', got {partition!r}")
    if partition == PARTITION_TRAIN and not config.allow_train_eval:
        raise ArgumentError("refusing to evaluate on the training partition; pass --allow-train-eval to override")

    prov = provenance(config)
    reports = []
    for model in selected_models(config):
        path = _resolve_checkpoint(config, model, checkpoint)
        run, header_prov = load_predictor(model, path)
        _, split = _check_split_provenance(config, header_prov, path)
        ids = split.test if partition == PARTITION_TEST else split.train
        samples = read_cohort(output_path(config, COHORT_FILE), ids=ids)
        predictions = run(samples)
        truth = [s.label(config.task) for s in samples]
        report = evaluate([label for _, label in predictions], truth, task=config.task, model=model)
        reports.append(report)

        suffix = "" if partition == PARTITION_TEST else f"_{partition}"
        write_json(output_path(config, config.task, f"metrics_{model}{suffix}.json"), {"report": report, "partition": partition}, prov)
        records = [
            {"admission_id": s.admission_id, "label": y, "predicted": label, "probability": p, "partition": partition}
            for s, y, (p, label) in zip(samples, truth, predictions)
        ]
        write_jsonl(output_path(config, config.task, predictions_file(model, partition)), records, prov)
        if report.is_degenerate:
            logger.warning(f"{model}: degenerate metrics {report.degenerate} reported as 0")

    print(f"Evaluation on the {partition} partition:\n{format_table(reports)}\n")
    return reports


def _read_predictions(path: str) -> Dict[str, bool]:
    return {obj["admission_id"]: bool(obj["predicted"]) for _, obj in read_jsonl(path)}


def cmd_explain(config: ExperimentConfig, checkpoint: Optional[str] = None) -> Dict[str, Any]:
    """Chi-square ranking and term-frequency report over correctly predicted holdout samples."""
    model = config.explain.model
    split = read_split(output_path(config, split_file(config.task)))
    predictions_path = output_path(config, config.task, predictions_file(model))
    predicted = _read_predictions(predictions_path)
    missing = [i for i in split.test if i not in predicted]
    if missing:
        raise DataFormatError(f"{len(missing)} test samples have no prediction; run evaluate first", path=predictions_path)

    samples = read_cohort(output_path(config, COHORT_FILE), ids=split.test)
    preds = [predicted[s.admission_id] for s in samples]
    if config.explain.include_train:
        path = checkpoint or default_checkpoint(config, model)
        run, header_prov = load_predictor(model, path)
        _check_split_provenance(config, header_prov, path)
        train_samples = read_cohort(output_path(config, COHORT_FILE), ids=split.train)
        samples = samples + train_samples
        preds = preds + [label for _, label in run(train_samples)]

    stopwords = load_stopwords(config.text.stopwords_path)
    docs = [LabeledDoc(doc_id=s.admission_id, tokens=tokenize(s.note_text, stopwords), label=s.label(config.task)) for s in samples]
    correct = filter_correct(docs, preds)
    n_pos = sum(1 for d in correct if d.label)
    n_neg = len(correct) - n_pos

    prov = provenance(config)
    features_path = output_path(config, config.task, f"features_{model}.csv")
    frequency_path = output_path(config, config.task, f"frequency_{model}.csv")
    if n_pos == 0 or n_neg == 0:
        print(f"No chi-square analysis: {n_pos} positive and {n_neg} negative correctly predicted samples.")
        write_feature_report(features_path, [], prov)
        write_frequency_report(frequency_path, [], config.explain.top_k_mask, prov)
        return {"correct": len(correct), "features": []}

    scores = top_k_features(correct, k=config.explain.k, n_workers=config.forest.n_workers)
    rows = frequency_report([s.term for s in scores], correct, config.explain.top_k_mask)
    write_feature_report(features_path, scores, prov)
    write_frequency_report(frequency_path, rows, config.explain.top_k_mask, prov)

    print(f"Top {len(scores)} features by chi-square ({n_pos} positive / {n_neg} negative correct samples):")
    for rank, s in enumerate(scores, start=1):
        print(f"  {rank:>3}. {s.term:<24} {s.chi2:10.3f}")
    return {"correct": len(correct), "n_pos": n_pos, "n_neg": n_neg, "features": [s.term for s in scores]}
