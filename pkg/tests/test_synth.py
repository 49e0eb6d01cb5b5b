import filecmp
import os

import pytest

from notecnn.cohort import build_cohort, cohort_stats, read_admissions, validate_timeline
from notecnn.cohort.labeling import group_by_patient
from notecnn.exceptions import ArgumentError
from notecnn.helpers import read_jsonl
from notecnn.schemas import SynthConfig
from notecnn.synth import GROUND_TRUTH_FILE, background_word, check_config, generate, generate_records
from notecnn.textprep import tokenize


def _small(**kwargs):
    return SynthConfig(**{"n_patients": 50, "min_note_length": 10, "max_note_length": 20, "background_vocab_size": 50, **kwargs})


@pytest.fixture(scope="module")
def synthetic(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    config = SynthConfig(n_patients=1000, min_note_length=5, max_note_length=15, background_vocab_size=200, missing_summary_rate=0.1, seed=17)
    result = generate(config, str(out), provenance={"config_hash": "abc", "seed": 17})
    return config, result


def test_cohort_labels_match_ground_truth(synthetic):
    _, result = synthetic
    admissions = read_admissions(result.admissions_path, result.notes_path)
    truth = {record["admission_id"]: record for _, record in read_jsonl(result.ground_truth_path)}
    samples = build_cohort(admissions)
    assert len(samples) == sum(1 for t in truth.values() if t["has_summary"])
    for sample in samples:
        expected = truth[sample.admission_id]
        assert sample.label_general == expected["label_general"], sample.admission_id
        assert sample.label_30day == expected["label_30day"], sample.admission_id


def test_cohort_statistics_match_generator_counts(synthetic):
    _, result = synthetic
    stats = cohort_stats(read_admissions(result.admissions_path, result.notes_path))
    assert stats.total == result.n_admissions
    assert stats.total_with_summary == result.n_with_summary
    assert stats.general_positive == result.n_general_positive
    assert stats.thirty_day_positive == result.n_30day_positive
    assert result.n_30day_positive <= result.n_general_positive


def test_generated_timelines_are_valid(synthetic):
    _, result = synthetic
    timelines = group_by_patient(read_admissions(result.admissions_path, result.notes_path))
    assert len(timelines) == 1000
    for timeline in timelines.values():
        validate_timeline(timeline)


def test_generation_is_byte_identical(tmp_path):
    config = _small(seed=3)
    generate(config, str(tmp_path / "a"))
    generate(config, str(tmp_path / "b"))
    for name in sorted(os.listdir(tmp_path / "a")):
        assert filecmp.cmp(tmp_path / "a" / name, tmp_path / "b" / name, shallow=False), name


def test_seed_changes_the_output():
    assert generate_records(_small(seed=1)) != generate_records(_small(seed=2))


def test_zero_readmission_rate_has_no_30day_positives():
    _, _, truth = generate_records(_small(readmit_30day_rate=0.0))
    assert not any(t["label_30day"] for t in truth)
    assert any(t["label_general"] for t in truth)


def test_single_admission_patients_are_all_negative():
    _, _, truth = generate_records(_small(min_admissions=1, max_admissions=1, readmit_30day_rate=0.0))
    assert not any(t["label_general"] or t["label_30day"] for t in truth)


def test_planted_signal_follows_the_label():
    config = _small(signal_probability=1.0)
    _, notes, truth = generate_records(config)
    labels = {t["admission_id"]: t["label_general"] for t in truth}
    for note in notes:
        if note["note_id"].endswith("-DS"):
            tokens = set(tokenize(note["text"]))
            planted = config.signal_tokens_pos if labels[note["admission_id"]] else config.signal_tokens_neg
            other = config.signal_tokens_neg if labels[note["admission_id"]] else config.signal_tokens_pos
            assert tokens & set(planted) and not tokens & set(other)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"min_admissions": 3, "max_admissions": 2},
        {"min_note_length": 30, "max_note_length": 20},
        {"max_admissions": 1, "min_admissions": 1, "readmit_30day_rate": 0.5},
        {"signal_tokens_pos": []},
        {"signal_tokens_pos": ["two words"]},
        {"signal_tokens_neg": ["12345"]},
    ],
)
def test_infeasible_configs_are_rejected(kwargs):
    with pytest.raises(ArgumentError):
        check_config(_small(**kwargs))


def test_invalid_patient_count_is_rejected():
    with pytest.raises(ArgumentError):
        SynthConfig(n_patients=0)


def test_background_words_are_distinct_tokens():
    words = [background_word(i) for i in range(300)]
    assert len(set(words)) == 300
    assert all(tokenize(w) == [w] or w in ("more",) for w in words)
    assert GROUND_TRUTH_FILE == "ground_truth.jsonl"
