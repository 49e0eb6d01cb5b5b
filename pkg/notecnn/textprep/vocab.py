from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import json
import struct
from collections import Counter

import numpy as np
from attrs import define, field

from notecnn.constants import ENCODED_MAGIC, ENCODED_VERSION, PAD_ID, PAD_TOKEN, UNK_ID, UNK_TOKEN
from notecnn.exceptions import ArgumentError, DataFormatError
from notecnn.utils.universal_encoder import canonical_json


@define(frozen=True)
class Vocabulary:
    """Token list whose positions are ids; 0 is PAD and 1 is UNK."""

    tokens: Tuple[str, ...] = field(converter=tuple)
    token_to_id: Dict[str, int] = field(init=False, repr=False, eq=False)

    def __attrs_post_init__(self):
        if self.tokens[:2] != (PAD_TOKEN, UNK_TOKEN):
            raise ArgumentError("vocabulary must start with the PAD and UNK tokens")
        mapping = {token: i for i, token in enumerate(self.tokens)}
        if len(mapping) != len(self.tokens):
            raise ArgumentError("vocabulary tokens must be unique")
        object.__setattr__(self, "token_to_id", mapping)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id and self.token_to_id[token] > UNK_ID

    def id_of(self, token: str) -> int:
        i = self.token_to_id.get(token, UNK_ID)
        return UNK_ID if i == PAD_ID else i

    @classmethod
    def from_ranked(cls, ranked_tokens: Iterable[str]) -> "Vocabulary":
        return cls((PAD_TOKEN, UNK_TOKEN, *ranked_tokens))


def build_vocab(corpus: Sequence[Sequence[str]], max_size: Optional[int] = None) -> Vocabulary:
    """Rank tokens by corpus frequency (ties lexicographic), truncate to max_size, assign ids from 2."""
    if not corpus:
        raise ArgumentError("cannot build a vocabulary from an empty corpus")
    counts = Counter(token for doc in corpus for token in doc)
    for reserved in (PAD_TOKEN, UNK_TOKEN):
        counts.pop(reserved, None)
    ranked = sorted(counts, key=lambda token: (-counts[token], token))
    if max_size is not None:
        ranked = ranked[:max_size]
    return Vocabulary.from_ranked(ranked)


@define(frozen=True, eq=False)
class EncodedNote:
    ids: np.ndarray
    true_length: int

    @property
    def n_max(self) -> int:
        return int(self.ids.shape[0])


def encode(tokens: Sequence[str], vocab: Vocabulary, n_max: int) -> EncodedNote:
    """Map tokens to ids, keep the first n_max, right-pad with PAD."""
    if n_max < 1:
        raise ArgumentError(f"n_max must be >= 1, got {n_max}")
    kept = tokens[:n_max]
    ids = np.full(n_max, PAD_ID, dtype=np.int64)
    ids[: len(kept)] = [vocab.id_of(token) for token in kept]
    return EncodedNote(ids=ids, true_length=len(kept))


def stack_ids(notes: Sequence[EncodedNote]) -> np.ndarray:
    return np.stack([note.ids for note in notes]) if notes else np.zeros((0, 0), dtype=np.int64)


_HEADER = struct.Struct("<4sHIII")


def save_encoded(path: str, notes: Sequence[EncodedNote], labels: Sequence[bool], provenance: Optional[Dict[str, Any]] = None) -> None:
    """Binary cache: magic, u16 version, u32 count, u32 n_max, u32 metadata length, JSON metadata with the
    provenance, then u32 lengths, u8 labels and i32 ids (all little-endian)."""
    if len(notes) != len(labels):
        raise ArgumentError("notes and labels differ in length")
    n_max = notes[0].n_max if notes else 0
    meta = canonical_json({"provenance": provenance}).encode("utf-8")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(ENCODED_MAGIC, ENCODED_VERSION, len(notes), n_max, len(meta)))
        f.write(meta)
        f.write(np.asarray([note.true_length for note in notes], dtype="<u4").tobytes())
        f.write(np.asarray(labels, dtype="u1").tobytes())
        f.write(stack_ids(notes).astype("<i4").tobytes())


def load_encoded(path: str) -> Tuple[List[EncodedNote], List[bool], Optional[Dict[str, Any]]]:
    """Notes, labels and the provenance recorded when the cache was written."""
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < _HEADER.size:
        raise DataFormatError("truncated encoded dataset", path=path)
    magic, version, count, n_max, meta_len = _HEADER.unpack_from(data)
    if magic != ENCODED_MAGIC:
        raise DataFormatError(f"bad magic {magic!r}", path=path)
    if version != ENCODED_VERSION:
        raise DataFormatError(f"unsupported encoded dataset version {version}", path=path)
    offset = _HEADER.size
    try:
        meta = json.loads(data[offset : offset + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DataFormatError(f"unreadable metadata: {e}", path=path) from e
    offset += meta_len
    expected = offset + 4 * count + count + 4 * count * n_max
    if len(data) != expected:
        raise DataFormatError(f"expected {expected} bytes, found {len(data)}", path=path)
    lengths = np.frombuffer(data, dtype="<u4", count=count, offset=offset)
    offset += 4 * count
    labels = np.frombuffer(data, dtype="u1", count=count, offset=offset)
    offset += count
    ids = np.frombuffer(data, dtype="<i4", count=count * n_max, offset=offset).reshape(count, n_max).astype(np.int64)
    notes = [EncodedNote(ids=ids[i].copy(), true_length=int(lengths[i])) for i in range(count)]
    return notes, [bool(y) for y in labels], meta.get("provenance") if isinstance(meta, dict) else None
