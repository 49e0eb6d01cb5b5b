from typing import Optional, Sequence

import numpy as np
import pytest

from notecnn.cnn import init_model
from notecnn.constants import SECONDS_PER_DAY
from notecnn.schemas import AdmissionRecord, CohortSample, NoteCategory, NoteRecord
from notecnn.textprep import EmbeddingTable, Vocabulary, encode, random_embeddings

BASE_TIME = 1_000_000_000


def make_admission(
    patient_id: str,
    admission_id: str,
    admit_day: float,
    discharge_day: float,
    codes: Sequence[str] = ("428.0",),
    text: str = "discharge summary text",
    notes: Optional[Sequence[NoteRecord]] = None,
) -> AdmissionRecord:
    if notes is None:
        notes = [NoteRecord(note_id=f"{admission_id}-ds", category=NoteCategory.DISCHARGE_SUMMARY, text=text)] if text else []
    return AdmissionRecord(
        patient_id=patient_id,
        admission_id=admission_id,
        admit_time=BASE_TIME + int(round(admit_day * SECONDS_PER_DAY)),
        discharge_time=BASE_TIME + int(round(discharge_day * SECONDS_PER_DAY)),
        icd9_codes=list(codes),
        notes=list(notes),
    )


def make_samples(n_pos: int, n_neg: int) -> list:
    samples = []
    for i in range(n_pos + n_neg):
        positive = i < n_pos
        samples.append(
            CohortSample(
                admission_id=f"A{i:05d}",
                patient_id=f"P{i:05d}",
                note_text=f"note {i}",
                label_general=positive,
                label_30day=False,
            )
        )
    return samples


@pytest.fixture
def tiny_vocab() -> Vocabulary:
    return Vocabulary.from_ranked(["alpha", "beta", "gamma", "delta", "eps", "zeta"])


@pytest.fixture
def tiny_embedding(tiny_vocab) -> EmbeddingTable:
    return EmbeddingTable(vocab=tiny_vocab, matrix=random_embeddings(tiny_vocab, 3, seed=7))


@pytest.fixture
def tiny_model(tiny_embedding):
    return init_model(tiny_embedding, widths=[1, 2, 3], filters_per_width=2, dropout_rate=0.0, seed=3)


def random_note(vocab: Vocabulary, n_max: int, rng: np.random.Generator, length: Optional[int] = None):
    length = n_max if length is None else length
    tokens = [vocab.tokens[i] for i in rng.integers(2, len(vocab), size=length)]
    return encode(tokens, vocab, n_max)
