import numpy as np
import pytest

from notecnn.evals import LabeledDoc, chi2_score, chi2_statistic, contingency_table, filter_correct, frequency_report, score_all, top_k_features, write_feature_report, write_frequency_report
from notecnn.exceptions import ArgumentError
from notecnn.helpers import read_csv_rows
from notecnn.schemas import ContingencyTable


def _docs(rows):
    return [LabeledDoc(doc_id=f"d{i}", tokens=tokens.split(), label=label) for i, (tokens, label) in enumerate(rows)]


def test_hand_computed_statistic():
    table = ContingencyTable(o_yes_pos=30, o_yes_neg=10, o_no_pos=70, o_no_neg=90)
    assert chi2_statistic(table) == pytest.approx(12.5, abs=1e-12)


def _brute_force(term, samples):
    n = len(samples)
    total = 0.0
    for contains in (True, False):
        for label in (True, False):
            observed = sum(1 for s in samples if (term in s.tokens) == contains and s.label == label)
            row = sum(1 for s in samples if (term in s.tokens) == contains)
            col = sum(1 for s in samples if s.label == label)
            expected = row * col / n
            if expected > 0:
                total += (observed - expected) ** 2 / expected
    return total


@pytest.mark.parametrize("seed", range(5))
def test_statistic_matches_brute_force(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    words = ["edema", "lasix", "dyspnea", "stable", "cath", "home"]
    samples = [
        LabeledDoc(doc_id=str(i), tokens=[words[j] for j in rng.integers(len(words), size=int(rng.integers(1, 8)))], label=bool(i % 3 == 0))
        for i in range(40)
    ]
    scores = {s.term: s for s in score_all(samples, n_workers=3)}
    for term in words:
        if term in scores:
            assert scores[term].chi2 == pytest.approx(_brute_force(term, samples), rel=1e-12)
            assert scores[term].table == contingency_table(term, samples)
            assert scores[term].table.total == 40


def test_statistic_is_symmetric_in_the_classes():
    samples = _docs([("a b", True), ("a", True), ("b", False), ("c", False), ("a c", False)])
    flipped = [LabeledDoc(doc_id=s.doc_id, tokens=s.tokens, label=not s.label) for s in samples]
    for term in "abc":
        assert chi2_score(term, samples).chi2 == pytest.approx(chi2_score(term, flipped).chi2, rel=1e-12)


def test_uninformative_terms_score_zero():
    samples = _docs([("a x", True), ("a", True), ("a y", False), ("a", False)])
    assert chi2_score("a", samples).chi2 == 0.0
    assert chi2_score("missing", samples).chi2 == 0.0
    even = _docs([("t", True), ("u", True), ("t", False), ("u", False)])
    assert chi2_score("t", even).chi2 == 0.0


def test_perfect_association_scores_the_sample_size():
    samples = _docs([("sig", True)] * 3 + [("other", False)] * 3)
    assert chi2_score("sig", samples).chi2 == pytest.approx(6.0)


def test_ranking_breaks_ties_by_term():
    samples = _docs([("zz aa", True), ("zz aa", True), ("mm", False), ("mm", False)])
    ranked = score_all(samples, n_workers=2)
    assert [s.term for s in ranked] == ["aa", "mm", "zz"]
    assert [s.term for s in top_k_features(samples, k=2, n_workers=1)] == ["aa", "mm"]


def test_scoring_requires_both_classes():
    with pytest.raises(ArgumentError, match="both classes"):
        score_all(_docs([("a", True), ("b", True)]))
    with pytest.raises(ArgumentError):
        chi2_score("a", [])
    with pytest.raises(ArgumentError):
        top_k_features(_docs([("a", True), ("b", False)]), k=0)


def test_filter_correct_keeps_input_order():
    samples = _docs([("a", True), ("b", False), ("c", True), ("d", False)])
    kept = filter_correct(samples, [True, True, False, False])
    assert [s.doc_id for s in kept] == ["d0", "d3"]
    with pytest.raises(ArgumentError):
        filter_correct(samples, [True])


def test_frequencies_without_masking_conserve_token_counts():
    samples = _docs([("a a b", True), ("b c", True), ("a c c", False)])
    rows = frequency_report(["a", "b", "c"], samples, top_k_mask=None)
    assert sum(r.count_pos for r in rows) == 5
    assert sum(r.count_neg for r in rows) == 3
    assert [(r.term, r.count_pos, r.count_neg) for r in rows] == [("a", 2, 1), ("b", 2, 0), ("c", 1, 2)]
    assert (rows[0].n_pos, rows[0].n_neg) == (2, 1)


def test_frequencies_mask_terms_outside_the_class_top_k():
    samples = _docs([("a a b c", True), ("d d d", False), ("b", False)])
    rows = {r.term: r for r in frequency_report(["a", "b", "d"], samples, top_k_mask=1)}
    assert rows["a"].count_pos == 2 and rows["a"].count_neg is None
    assert rows["b"].count_pos is None and rows["b"].count_neg is None
    assert rows["d"].count_pos is None and rows["d"].count_neg == 3


def test_report_files(tmp_path):
    samples = _docs([("sig x", True), ("sig", True), ("x", False), ("y", False)])
    scores = top_k_features(samples, k=2, n_workers=1)
    write_feature_report(str(tmp_path / "features.csv"), scores, provenance={"config_hash": "abc", "seed": 3})
    rows = read_csv_rows(str(tmp_path / "features.csv"))
    assert rows[0]["term"] == "sig"
    assert float(rows[0]["chi2"]) == scores[0].chi2
    assert (tmp_path / "features.csv").read_text().startswith("# config_hash=abc,seed=3\n")

    write_frequency_report(str(tmp_path / "frequency.csv"), frequency_report(["sig", "y"], samples, top_k_mask=1), top_k_mask=1)
    rows = read_csv_rows(str(tmp_path / "frequency.csv"))
    assert rows[0] == {"term": "sig", "count_pos": "2", "count_neg": "non-top1", "n_pos": "2", "n_neg": "2"}
    assert rows[1]["count_pos"] == "non-top1"
