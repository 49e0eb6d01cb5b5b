from typing import Dict, List, Optional, Sequence, Tuple

import logging
from collections import OrderedDict

import numpy as np
from attrs import define, field

from notecnn.constants import PAD_ID
from notecnn.exceptions import ArgumentError, DimensionError, NumericError
from notecnn.textprep import EmbeddingTable, EncodedNote, Vocabulary, stack_ids

from .layers import dropout_mask, log_softmax, relu, softmax

logger = logging.getLogger()

MODE_TRAIN = "train"
MODE_EVAL = "eval"


@define(eq=False)
class CnnModel:
    """All trainable parameters: embedding rows, one filter bank per width, and the dense softmax layer."""

    vocab: Vocabulary
    embedding: np.ndarray = field(repr=False)
    # width h -> (f, h, k) filters and (f,) biases
    filters: Dict[int, np.ndarray] = field(repr=False)
    biases: Dict[int, np.ndarray] = field(repr=False)
    dense_W: np.ndarray = field(repr=False)
    dense_b: np.ndarray = field(repr=False)
    widths: List[int] = field(factory=lambda: [1, 2, 3])
    dropout_rate: float = 0.5

    def __attrs_post_init__(self):
        k = self.k
        for h in self.widths:
            f, fh, fk = self.filters[h].shape
            if fh != h or fk != k or self.biases[h].shape != (f,):
                raise DimensionError(f"filter bank for width {h} has shape {self.filters[h].shape}")
        if self.dense_W.shape != (2, self.m) or self.dense_b.shape != (2,):
            raise DimensionError(f"dense layer shape {self.dense_W.shape} does not match m={self.m}")

    @property
    def k(self) -> int:
        return int(self.embedding.shape[1])

    @property
    def filters_per_width(self) -> int:
        return int(self.filters[self.widths[0]].shape[0])

    @property
    def m(self) -> int:
        return sum(int(self.filters[h].shape[0]) for h in self.widths)

    def parameters(self) -> "OrderedDict[str, np.ndarray]":
        """Parameter arrays in their declared order; entries alias the model's own arrays."""
        params = OrderedDict()
        params["embedding"] = self.embedding
        for h in self.widths:
            params[f"filters_{h}"] = self.filters[h]
            params[f"bias_{h}"] = self.biases[h]
        params["dense_W"] = self.dense_W
        params["dense_b"] = self.dense_b
        return params

    def copy(self) -> "CnnModel":
        return CnnModel(
            vocab=self.vocab,
            embedding=self.embedding.copy(),
            filters={h: w.copy() for h, w in self.filters.items()},
            biases={h: b.copy() for h, b in self.biases.items()},
            dense_W=self.dense_W.copy(),
            dense_b=self.dense_b.copy(),
            widths=list(self.widths),
            dropout_rate=self.dropout_rate,
        )


@define(eq=False)
class ForwardTrace:
    # width -> (n - h + 1, f) post-activation feature maps
    feature_maps: Dict[int, np.ndarray]
    pooled: np.ndarray
    pooled_index: np.ndarray
    Z: np.ndarray
    logits: np.ndarray
    p: np.ndarray
    dropout: Optional[np.ndarray] = None


def _glorot(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_model(embedding: EmbeddingTable, widths: Sequence[int] = (1, 2, 3), filters_per_width: int = 100, dropout_rate: float = 0.5, seed: int = 0) -> CnnModel:
    """Glorot-uniform filters and dense weights, zero biases, and a trainable copy of the embedding table."""
    if not widths or min(widths) < 1:
        raise ArgumentError(f"filter widths must be positive, got {list(widths)}")
    rng = np.random.Generator(np.random.PCG64(seed))
    k = embedding.k
    f = filters_per_width
    filters = {h: _glorot(rng, (f, h, k), fan_in=h * k, fan_out=h * f) for h in widths}
    biases = {h: np.zeros(f) for h in widths}
    m = f * len(widths)
    return CnnModel(
        vocab=embedding.vocab,
        embedding=embedding.matrix.astype(np.float64, copy=True),
        filters=filters,
        biases=biases,
        dense_W=_glorot(rng, (2, m), fan_in=m, fan_out=2),
        dense_b=np.zeros(2),
        widths=list(widths),
        dropout_rate=dropout_rate,
    )


def _locate_non_finite(model: CnnModel, stage: str) -> str:
    for name, value in model.parameters().items():
        if not np.all(np.isfinite(value)):
            return name
    return stage


@define(eq=False)
class _BatchCache:
    ids: np.ndarray
    X: np.ndarray
    pre: Dict[int, np.ndarray]
    argmax: Dict[int, np.ndarray]
    Z: np.ndarray
    Zd: np.ndarray
    mask: Optional[np.ndarray]
    logits: np.ndarray
    log_p: np.ndarray


def _forward_batch(model: CnnModel, ids: np.ndarray, rng: Optional[np.random.Generator]) -> _BatchCache:
    batch, n = ids.shape
    if ids.size and (ids.min() < 0 or ids.max() >= model.embedding.shape[0]):
        raise DimensionError(f"token ids outside [0, {model.embedding.shape[0]})")
    X = model.embedding[ids]
    pre: Dict[int, np.ndarray] = {}
    argmax: Dict[int, np.ndarray] = {}
    pooled = []
    for h in model.widths:
        length = n - h + 1
        if length < 1:
            raise DimensionError(f"note length {n} is shorter than filter size {h}")
        F = model.filters[h]
        acc = np.broadcast_to(model.biases[h], (batch, length, F.shape[0])).copy()
        for t in range(h):
            acc += X[:, t : t + length, :] @ F[:, t, :].T
        j = np.argmax(relu(acc), axis=1)
        pre[h] = acc
        argmax[h] = j
        pooled.append(relu(np.take_along_axis(acc, j[:, None, :], axis=1)[:, 0, :]))
    Z = np.concatenate(pooled, axis=1)
    mask = dropout_mask(Z.shape, model.dropout_rate, rng)
    Zd = Z * mask if mask is not None else Z
    logits = Zd @ model.dense_W.T + model.dense_b
    if not np.all(np.isfinite(logits)):
        raise NumericError("non-finite logits in forward pass", location=_locate_non_finite(model, "logits"))
    return _BatchCache(ids=ids, X=X, pre=pre, argmax=argmax, Z=Z, Zd=Zd, mask=mask, logits=logits, log_p=log_softmax(logits))


def _dropout_rng(mode: str, seed: Optional[int]) -> Optional[np.random.Generator]:
    if mode not in (MODE_TRAIN, MODE_EVAL):
        raise ArgumentError(f"mode must be '{MODE_TRAIN}' or '{MODE_EVAL}', got {mode!r}")
    if mode == MODE_EVAL:
        return None
    return np.random.Generator(np.random.PCG64(seed if seed is not None else 0))


def forward(note: EncodedNote, model: CnnModel, mode: str = MODE_EVAL, seed: Optional[int] = None) -> ForwardTrace:
    cache = _forward_batch(model, note.ids[None, :], _dropout_rng(mode, seed))
    pooled_index = [cache.argmax[h][0] for h in model.widths]
    return ForwardTrace(
        feature_maps={h: relu(cache.pre[h][0]) for h in model.widths},
        pooled=cache.Z[0],
        pooled_index=np.concatenate(pooled_index),
        Z=cache.Z[0],
        logits=cache.logits[0],
        p=softmax(cache.logits[0]),
        dropout=cache.mask[0] if cache.mask is not None else None,
    )


def _backward_batch(model: CnnModel, cache: _BatchCache, labels: np.ndarray, fine_tune_embeddings: bool) -> "OrderedDict[str, np.ndarray]":
    batch = labels.shape[0]
    g = np.exp(cache.log_p)
    g[np.arange(batch), labels] -= 1.0
    g /= batch

    grads = OrderedDict((name, np.zeros_like(value)) for name, value in model.parameters().items())
    grads["dense_W"] = g.T @ cache.Zd
    grads["dense_b"] = g.sum(axis=0)
    dZ = g @ model.dense_W
    if cache.mask is not None:
        dZ = dZ * cache.mask

    rows = np.arange(batch)[:, None]
    dE = grads["embedding"]
    offset = 0
    for h in model.widths:
        F = model.filters[h]
        f = F.shape[0]
        j = cache.argmax[h]
        pre_max = np.take_along_axis(cache.pre[h], j[:, None, :], axis=1)[:, 0, :]
        dpre = dZ[:, offset : offset + f] * (pre_max > 0.0)
        offset += f
        grads[f"bias_{h}"] = dpre.sum(axis=0)
        dF = grads[f"filters_{h}"]
        for t in range(h):
            window = cache.X[rows, j + t]
            dF[:, t, :] = np.einsum("bf,bfk->fk", dpre, window)
            if fine_tune_embeddings:
                tokens = cache.ids[rows, j + t]
                contrib = dpre[:, :, None] * F[None, :, t, :]
                keep = tokens != PAD_ID
                np.add.at(dE, tokens[keep], contrib[keep])
    return grads


def loss_and_gradients(
    batch: Sequence[Tuple[EncodedNote, bool]],
    model: CnnModel,
    seed: Optional[int] = None,
    mode: str = MODE_TRAIN,
    fine_tune_embeddings: bool = True,
) -> Tuple[float, "OrderedDict[str, np.ndarray]"]:
    """Mean negative log-likelihood of the batch and its gradient for every parameter group.

    PAD rows of the embedding never receive gradient; with fine_tune_embeddings off the embedding
    gradient is all zeros.
    """
    if not batch:
        raise ArgumentError("batch must not be empty")
    ids = stack_ids([note for note, _ in batch])
    labels = np.asarray([int(bool(label)) for _, label in batch])
    cache = _forward_batch(model, ids, _dropout_rng(mode, seed))
    loss = float(-np.mean(cache.log_p[np.arange(len(labels)), labels]))
    if not np.isfinite(loss):
        raise NumericError("non-finite loss", location=_locate_non_finite(model, "loss"))
    return loss, _backward_batch(model, cache, labels, fine_tune_embeddings)


def predict_scores(notes: Sequence[EncodedNote], model: CnnModel, batch_size: int = 64) -> Tuple[np.ndarray, np.ndarray]:
    """Eval-mode positive-class probabilities and labels; a logit tie is labeled negative."""
    probs, labels = [], []
    for start in range(0, len(notes), batch_size):
        cache = _forward_batch(model, stack_ids(notes[start : start + batch_size]), None)
        probs.append(softmax(cache.logits)[:, 1])
        labels.append(cache.logits[:, 1] > cache.logits[:, 0])
    if not probs:
        return np.zeros(0), np.zeros(0, dtype=bool)
    return np.concatenate(probs), np.concatenate(labels)


def predict(notes: Sequence[EncodedNote], model: CnnModel, batch_size: int = 64) -> List[Tuple[float, bool]]:
    """(probability of readmission, label) per note; p = (0.5, 0.5) is labeled negative."""
    probs, labels = predict_scores(notes, model, batch_size)
    return [(float(p), bool(y)) for p, y in zip(probs, labels)]
