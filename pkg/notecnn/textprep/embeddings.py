from typing import Optional

import logging
import os

import numpy as np
from attrs import define, field

from notecnn.constants import OOV_INIT_RANGE, PAD_ID
from notecnn.exceptions import ArgumentError, DataFormatError
from notecnn.helpers import iter_text_lines
from notecnn.textprep.vocab import EncodedNote, Vocabulary

logger = logging.getLogger()


@define(frozen=True, eq=False)
class EmbeddingTable:
    vocab: Vocabulary
    matrix: np.ndarray = field(repr=False)

    def __attrs_post_init__(self):
        if self.matrix.shape[0] != len(self.vocab):
            raise ArgumentError(f"embedding rows ({self.matrix.shape[0]}) != vocabulary size ({len(self.vocab)})")
        if not np.all(np.isfinite(self.matrix)):
            raise ArgumentError("embedding table contains non-finite entries")

    @property
    def k(self) -> int:
        return int(self.matrix.shape[1])

    def lookup(self, note: EncodedNote) -> np.ndarray:
        """The n_max x k input matrix of a note; PAD positions are zero rows."""
        return self.matrix[note.ids]


def random_embeddings(vocab: Vocabulary, k: int, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed))
    matrix = rng.uniform(-OOV_INIT_RANGE, OOV_INIT_RANGE, size=(len(vocab), k))
    matrix[PAD_ID] = 0.0
    return matrix


def load_embeddings(path: Optional[str], vocab: Vocabulary, k: int, seed: int) -> EmbeddingTable:
    """Pre-trained vectors for tokens found in a plain-text embedding file; uniform(-0.25, 0.25) elsewhere.

    The file starts with a "count dim" header followed by "token v1 ... v_dim" lines. Every line's
    field count is checked; floats are parsed for in-vocabulary tokens. Without a path every row is
    random. The random draw covers the whole table first, so results do not depend on file content.
    """
    matrix = random_embeddings(vocab, k, seed)
    if path is None:
        return EmbeddingTable(vocab=vocab, matrix=matrix)
    if not os.path.exists(path):
        raise FileNotFoundError(f"No such embedding file: {path}")

    found = 0
    lines = iter_text_lines(path)
    first = next(lines, None)
    header = first[1].split() if first is not None else []
    if len(header) != 2 or not all(part.isdigit() for part in header):
        raise DataFormatError("expected a 'count dim' header", path=path, line=1)
    dim = int(header[1])
    if dim != k:
        raise DataFormatError(f"embedding dimension {dim} does not match configured k={k}", path=path, line=1)
    for line_no, line in lines:
        parts = line.split()
        if not parts:
            continue
        if len(parts) != dim + 1:
            raise DataFormatError(f"expected {dim + 1} fields, found {len(parts)}", path=path, line=line_no)
        token = parts[0]
        if token not in vocab:
            continue
        try:
            vector = np.array([float(x) for x in parts[1:]], dtype=np.float64)
        except ValueError as e:
            raise DataFormatError(f"unparsable float ({e})", path=path, line=line_no) from e
        if not np.all(np.isfinite(vector)):
            raise DataFormatError("non-finite vector entry", path=path, line=line_no)
        matrix[vocab.id_of(token)] = vector
        found += 1

    matrix[PAD_ID] = 0.0
    logger.info(f"Loaded {found} of {len(vocab) - 2} vocabulary vectors from {path}; the rest are randomly initialized")
    return EmbeddingTable(vocab=vocab, matrix=matrix)
