from typing import Any, Dict, List, Optional, Tuple

import logging
import os

import numpy as np
from attrs import define

from notecnn.constants import HEART_FAILURE_ICD9_CODES, SECONDS_PER_DAY, TASK_GENERAL
from notecnn.exceptions import ArgumentError
from notecnn.helpers import format_utc_timestamp, progress, write_jsonl
from notecnn.schemas import NoteCategory, SynthConfig
from notecnn.textprep import tokenize

logger = logging.getLogger()

ADMISSIONS_FILE = "admissions.jsonl"
NOTES_FILE = "notes.jsonl"
GROUND_TRUTH_FILE = "ground_truth.jsonl"

QUALIFYING_CODES = tuple(sorted(HEART_FAILURE_ICD9_CODES))
# common comorbidities, none of them heart-failure codes
OTHER_CODES = ("250.00", "272.4", "276.1", "285.9", "401.9", "403.90", "414.01", "427.31", "486", "496", "518.81", "584.9", "585.9", "599.0")
FILLER_WORDS = ("the", "was", "and", "of", "with", "on", "to", "for", "is", "in")
NUMBER_WORDS = ("40", "12/5", "1.5", "100", "2", "0.25", "3/4")
SYLLABLES = ("ba", "ce", "di", "fo", "gu", "ha", "ke", "li", "mo", "nu", "pa", "re", "si", "to", "vu", "za")

# timelines start somewhere in the ten years after 2101-01-01
_EPOCH_START = 4133980800
_START_SPAN_DAYS = 3650
_MAX_STAY_DAYS = 14
_MAX_LONG_GAP_DAYS = 365
_FILLER_RATE = 0.08
_NUMBER_RATE = 0.04


@define
class SynthResult:
    admissions_path: str
    notes_path: str
    ground_truth_path: str
    n_patients: int
    n_admissions: int
    n_general_positive: int
    n_30day_positive: int
    n_with_summary: int


def background_word(index: int) -> str:
    """Deterministic pronounceable pseudo-word for a background vocabulary rank.

    >>> background_word(0), background_word(17)
    ('baba', 'cece')
    """
    base = len(SYLLABLES)
    parts = [SYLLABLES[index % base]]
    index //= base
    while True:
        parts.append(SYLLABLES[index % base])
        index //= base
        if index == 0:
            break
    return "".join(reversed(parts))


def check_config(config: SynthConfig) -> None:
    if config.min_admissions > config.max_admissions:
        raise ArgumentError(f"min_admissions {config.min_admissions} exceeds max_admissions {config.max_admissions}")
    if config.min_note_length > config.max_note_length:
        raise ArgumentError(f"min_note_length {config.min_note_length} exceeds max_note_length {config.max_note_length}")
    if config.readmit_30day_rate > 0 and config.max_admissions < 2:
        raise ArgumentError("a positive readmission rate needs max_admissions >= 2")
    if config.signal_probability > 0 and (not config.signal_tokens_pos or not config.signal_tokens_neg):
        raise ArgumentError("signal planting needs positive and negative signal tokens")
    for token in [*config.signal_tokens_pos, *config.signal_tokens_neg]:
        if tokenize(token) != [token]:
            raise ArgumentError(f"signal token {token!r} would not survive tokenization")
    overlap = set(config.signal_tokens_pos) & set(config.signal_tokens_neg)
    if overlap:
        logger.warning(f"signal tokens shared by both classes: {sorted(overlap)}")


class _NoteWriter:
    def __init__(self, config: SynthConfig, rng: np.random.Generator):
        self.config = config
        self.rng = rng
        ranks = np.arange(1, config.background_vocab_size + 1, dtype=np.float64)
        weights = ranks ** (-config.zipf_exponent)
        self.probabilities = weights / weights.sum()
        self.vocab = [background_word(i) for i in range(config.background_vocab_size)]

    def background(self) -> List[str]:
        rng = self.rng
        length = int(rng.integers(self.config.min_note_length, self.config.max_note_length + 1))
        ranks = rng.choice(len(self.vocab), size=length, p=self.probabilities)
        noise = rng.random(length)
        words = []
        for rank, u in zip(ranks, noise):
            if u < _FILLER_RATE:
                words.append(FILLER_WORDS[int(rng.integers(len(FILLER_WORDS)))])
            elif u < _FILLER_RATE + _NUMBER_RATE:
                words.append(NUMBER_WORDS[int(rng.integers(len(NUMBER_WORDS)))])
            else:
                words.append(self.vocab[rank])
        return words

    def summary(self, label: bool) -> str:
        words = self.background()
        if self.rng.random() < self.config.signal_probability:
            tokens = self.config.signal_tokens_pos if label else self.config.signal_tokens_neg
            token = tokens[int(self.rng.integers(len(tokens)))]
            words.insert(int(self.rng.integers(len(words) + 1)), token)
        return " ".join(words)

    def other(self) -> str:
        return " ".join(self.background())


def generate_records(config: SynthConfig) -> Tuple[List[Dict[str, Any]], List[Dict[str, Any]], List[Dict[str, Any]]]:
    """Admissions, notes and ground-truth records, a pure function of ``config``.

    Every admission carries a qualifying code. A non-final admission is followed by the next one
    after 1-30 whole days with probability ``readmit_30day_rate`` and after more than 31 days
    otherwise, so its intended labels are known without looking at the timeline.
    """
    check_config(config)
    rng = np.random.Generator(np.random.PCG64(config.seed))
    notes_writer = _NoteWriter(config, rng)
    admissions, notes, truth = [], [], []
    counter = 0
    for p in progress(range(config.n_patients), desc="synth", unit="patient"):
        patient_id = f"P{p:06d}"
        n_adm = int(rng.integers(config.min_admissions, config.max_admissions + 1))
        admit = _EPOCH_START + int(rng.integers(_START_SPAN_DAYS)) * SECONDS_PER_DAY + int(rng.integers(SECONDS_PER_DAY))
        for i in range(n_adm):
            counter += 1
            admission_id = f"A{counter:07d}"
            discharge = admit + int(rng.integers(SECONDS_PER_DAY, _MAX_STAY_DAYS * SECONDS_PER_DAY + 1))
            is_last = i == n_adm - 1
            within_30 = False
            gap = 0
            if not is_last:
                within_30 = bool(rng.random() < config.readmit_30day_rate)
                if within_30:
                    gap = int(rng.integers(1, 31)) * SECONDS_PER_DAY
                else:
                    gap = int(rng.integers(31, _MAX_LONG_GAP_DAYS + 1)) * SECONDS_PER_DAY + int(rng.integers(SECONDS_PER_DAY))
            label_general = not is_last

            n_extra = int(rng.integers(config.max_extra_codes + 1))
            codes = [QUALIFYING_CODES[int(rng.integers(len(QUALIFYING_CODES)))]]
            codes += [str(c) for c in rng.choice(OTHER_CODES, size=n_extra, replace=False)] if n_extra else []
            admissions.append(
                {
                    "patient_id": patient_id,
                    "admission_id": admission_id,
                    "admit_time": format_utc_timestamp(admit),
                    "discharge_time": format_utc_timestamp(discharge),
                    "icd9_codes": codes,
                }
            )

            signal_label = label_general if config.signal_task == TASK_GENERAL else within_30
            has_summary = not bool(rng.random() < config.missing_summary_rate)
            if has_summary:
                notes.append({"admission_id": admission_id, "note_id": f"{admission_id}-DS", "category": NoteCategory.DISCHARGE_SUMMARY.value, "text": notes_writer.summary(signal_label)})
            if rng.random() < config.other_note_rate:
                notes.append({"admission_id": admission_id, "note_id": f"{admission_id}-OT", "category": NoteCategory.OTHER.value, "text": notes_writer.other()})
            truth.append(
                {
                    "patient_id": patient_id,
                    "admission_id": admission_id,
                    "label_general": label_general,
                    "label_30day": within_30,
                    "has_summary": has_summary,
                }
            )
            admit = discharge + gap
    return admissions, notes, truth


def ground_truth_counts(truth: List[Dict[str, Any]]) -> Dict[str, int]:
    return {
        "n_admissions": len(truth),
        "n_general_positive": sum(1 for t in truth if t["label_general"]),
        "n_30day_positive": sum(1 for t in truth if t["label_30day"]),
        "n_with_summary": sum(1 for t in truth if t["has_summary"]),
    }


def generate(config: SynthConfig, output_dir: str, provenance: Optional[Dict[str, Any]] = None) -> SynthResult:
    """Write admissions, notes and ground truth as JSON-lines under ``output_dir``."""
    admissions, notes, truth = generate_records(config)
    os.makedirs(output_dir, exist_ok=True)
    paths = [os.path.join(output_dir, name) for name in (ADMISSIONS_FILE, NOTES_FILE, GROUND_TRUTH_FILE)]
    for path, records in zip(paths, (admissions, notes, truth)):
        write_jsonl(path, records, provenance)
    counts = ground_truth_counts(truth)
    logger.info(f"synth: {config.n_patients} patients, {counts['n_admissions']} admissions written to {output_dir}")
    return SynthResult(admissions_path=paths[0], notes_path=paths[1], ground_truth_path=paths[2], n_patients=config.n_patients, **counts)
