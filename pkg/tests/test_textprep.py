import numpy as np
import pytest

from notecnn.constants import PAD_ID, UNK_ID
from notecnn.exceptions import DataFormatError
from notecnn.textprep import build_vocab, encode, load_embeddings, load_encoded, load_stopwords, save_encoded, tokenize


def test_stopword_list_has_179_entries():
    assert len(load_stopwords()) == 179


@pytest.mark.parametrize(
    "text,expected",
    [
        ("Lasix 40 mg PO daily", ["lasix", "mg", "po", "daily"]),
        ("The patient was stable", ["patient", "stable"]),
        ("", []),
        ("BP 12/5, dose 1.5 tabs", ["bp", "dose", "tabs"]),
        ("torsemide/toremide  x2", ["torsemide", "toremide", "x2"]),
    ],
)
def test_tokenize(text, expected):
    assert tokenize(text) == expected


def test_build_vocab_ranks_by_frequency_then_lexicographic():
    vocab = build_vocab([["b", "a", "a"], ["a", "c"]])
    assert vocab.tokens == ("<pad>", "<unk>", "a", "b", "c")
    assert vocab.id_of("a") == 2


def test_build_vocab_truncates():
    vocab = build_vocab([["a", "b", "c", "d", "e"]], max_size=3)
    assert len(vocab) == 5
    assert "d" not in vocab


def test_encode_pads_truncates_and_maps_unknown():
    vocab = build_vocab([["a", "b"]])
    note = encode(["a", "b"], vocab, 4)
    assert note.ids.tolist() == [vocab.id_of("a"), vocab.id_of("b"), PAD_ID, PAD_ID]
    assert note.true_length == 2
    assert encode(["zzz"], vocab, 2).ids.tolist() == [UNK_ID, PAD_ID]

    long_note = encode(["a"] * 4999 + ["b"], vocab, 2000)
    assert long_note.true_length == 2000
    assert set(long_note.ids.tolist()) == {vocab.id_of("a")}


def test_encoded_ids_stay_below_vocab_size():
    vocab = build_vocab([tokenize("heart failure admitted with dyspnea")])
    note = encode(tokenize("dyspnea worse, unknown words here"), vocab, 10)
    assert note.ids.max() < len(vocab)


def _write_embeddings(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def test_load_embeddings_uses_file_vectors_and_seeded_noise(tmp_path):
    vocab = build_vocab([["lasix", "edema", "rare"]])
    path = _write_embeddings(tmp_path / "vec.txt", ["3 3", "lasix 0.1 0.2 0.3", "edema 1 2 3", "other 9 9 9"])
    table = load_embeddings(path, vocab, k=3, seed=4)
    np.testing.assert_array_equal(table.matrix[vocab.id_of("lasix")], [0.1, 0.2, 0.3])
    np.testing.assert_array_equal(table.matrix[vocab.id_of("edema")], [1.0, 2.0, 3.0])
    rare = table.matrix[vocab.id_of("rare")]
    assert np.all(np.abs(rare) < 0.25)
    np.testing.assert_array_equal(table.matrix[PAD_ID], np.zeros(3))
    np.testing.assert_array_equal(load_embeddings(path, vocab, k=3, seed=4).matrix, table.matrix)


def test_load_embeddings_dimension_mismatch(tmp_path):
    vocab = build_vocab([["a"]])
    path = _write_embeddings(tmp_path / "vec.txt", ["1 100", "a " + " ".join(["0"] * 100)])
    with pytest.raises(DataFormatError, match="dimension"):
        load_embeddings(path, vocab, k=200, seed=0)


def test_load_embeddings_bad_float_reports_line(tmp_path):
    vocab = build_vocab([["a", "b"]])
    path = _write_embeddings(tmp_path / "vec.txt", ["2 2", "a 0.1 0.2", "b 0.3 oops"])
    with pytest.raises(DataFormatError) as excinfo:
        load_embeddings(path, vocab, k=2, seed=0)
    assert excinfo.value.line == 3


def test_load_embeddings_invalid_utf8_reports_line(tmp_path):
    vocab = build_vocab([["a", "b"]])
    path = tmp_path / "vec.txt"
    path.write_bytes(b"2 2\na 0.1 0.2\n\xe9\xff 0.3 0.4\n")
    with pytest.raises(DataFormatError, match="invalid UTF-8") as excinfo:
        load_embeddings(str(path), vocab, k=2, seed=0)
    assert excinfo.value.line == 3


def test_lookup_gives_zero_rows_for_padding(tiny_embedding, tiny_vocab):
    note = encode(["alpha", "beta"], tiny_vocab, 5)
    X = tiny_embedding.lookup(note)
    assert X.shape == (5, 3)
    np.testing.assert_array_equal(X[2:], np.zeros((3, 3)))


def test_encoded_cache_file(tmp_path, tiny_vocab):
    notes = [encode(["alpha", "gamma"], tiny_vocab, 4), encode(["zeta"] * 6, tiny_vocab, 4)]
    path = str(tmp_path / "train.ncnn")
    save_encoded(path, notes, [True, False], provenance={"config_hash": "abc", "seed": 3})
    with open(path, "rb") as f:
        assert f.read(4) == b"NCNN"
    loaded, labels, provenance = load_encoded(path)
    assert labels == [True, False]
    assert provenance == {"config_hash": "abc", "seed": 3}
    assert [n.true_length for n in loaded] == [2, 4]
    np.testing.assert_array_equal(loaded[1].ids, notes[1].ids)


def test_encoded_cache_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.ncnn"
    path.write_bytes(b"XXXX" + bytes(16))
    with pytest.raises(DataFormatError, match="magic"):
        load_encoded(str(path))


def test_encoded_cache_rejects_truncated_ids(tmp_path, tiny_vocab):
    path = tmp_path / "train.ncnn"
    save_encoded(str(path), [encode(["alpha"], tiny_vocab, 4)], [True])
    path.write_bytes(path.read_bytes()[:-2])
    with pytest.raises(DataFormatError, match="expected"):
        load_encoded(str(path))
