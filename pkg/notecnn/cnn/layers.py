from typing import Optional, Tuple

import numpy as np

from notecnn.exceptions import DimensionError


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def conv_forward(X: np.ndarray, filt: np.ndarray, bias: float) -> np.ndarray:
    """Feature map C_j = ReLU(<filt, X[j:j+h]> + bias) for j = 0..n-h.

    >>> conv_forward(np.array([[1.0], [2.0], [3.0]]), np.array([[1.0], [1.0]]), 0.0)
    array([3., 5.])
    """
    n, k = X.shape
    h = filt.shape[0]
    if filt.shape[1] != k:
        raise DimensionError(f"filter width {filt.shape[1]} does not match embedding dimension {k}")
    if n < h:
        raise DimensionError(f"input of length {n} is shorter than filter size {h}")
    length = n - h + 1
    pre = np.full(length, float(bias))
    for t in range(h):
        pre += X[t : t + length] @ filt[t]
    return relu(pre)


def max_pool(C: np.ndarray) -> Tuple[float, int]:
    """Max-over-time pooling; returns the value and its index (lowest index on ties)."""
    if C.size == 0:
        raise DimensionError("cannot pool an empty feature map")
    j = int(np.argmax(C))
    return float(C[j]), j


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    e = np.exp(logits - np.max(logits, axis=-1, keepdims=True))
    return e / np.sum(e, axis=-1, keepdims=True)


def dropout_mask(shape, rate: float, rng: Optional[np.random.Generator]) -> Optional[np.ndarray]:
    """Inverted dropout: kept units are scaled by 1/(1-rate). None when no dropout applies."""
    if rate <= 0.0 or rng is None:
        return None
    keep = rng.random(shape) >= rate
    return keep / (1.0 - rate)
