from typing import Any, Dict, Optional, Tuple

from notecnn.constants import CNN_CHECKPOINT_MAGIC, CNN_CHECKPOINT_VERSION
from notecnn.exceptions import ArgumentError, DataFormatError
from notecnn.textprep import Vocabulary
from notecnn.utils import read_container, write_container

from .model import CnnModel


def save_checkpoint(path: str, model: CnnModel, config_echo: Optional[Dict[str, Any]] = None, provenance: Optional[Dict[str, Any]] = None) -> None:
    """Write the model as an NCNM file: JSON header with dimensions and vocabulary, then parameters in declared order."""
    header = {
        "widths": list(model.widths),
        "filters_per_width": model.filters_per_width,
        "k": model.k,
        "vocab_size": len(model.vocab),
        "vocab": list(model.vocab.tokens),
        "dropout_rate": model.dropout_rate,
        "config": config_echo or {},
        "provenance": provenance or {},
    }
    write_container(path, CNN_CHECKPOINT_MAGIC, CNN_CHECKPOINT_VERSION, header, model.parameters())


def load_checkpoint(path: str) -> Tuple[CnnModel, Dict[str, Any]]:
    header, arrays = read_container(path, CNN_CHECKPOINT_MAGIC, CNN_CHECKPOINT_VERSION)
    try:
        widths = [int(h) for h in header["widths"]]
        vocab = Vocabulary(tokens=tuple(header["vocab"]))
        if len(vocab) != header["vocab_size"]:
            raise DataFormatError(f"header vocab_size {header['vocab_size']} but {len(vocab)} tokens", path=path)
        expected = ["embedding"] + [name for h in widths for name in (f"filters_{h}", f"bias_{h}")] + ["dense_W", "dense_b"]
        if list(arrays.keys()) != expected:
            raise DataFormatError(f"parameter arrays {list(arrays.keys())} do not match widths {widths}", path=path)
        model = CnnModel(
            vocab=vocab,
            embedding=arrays["embedding"],
            filters={h: arrays[f"filters_{h}"] for h in widths},
            biases={h: arrays[f"bias_{h}"] for h in widths},
            dense_W=arrays["dense_W"],
            dense_b=arrays["dense_b"],
            widths=widths,
            dropout_rate=float(header["dropout_rate"]),
        )
    except KeyError as e:
        raise DataFormatError(f"checkpoint header is missing {e}", path=path) from e
    except ArgumentError as e:
        raise DataFormatError(str(e), path=path) from e
    if model.k != header["k"] or model.embedding.shape[0] != len(vocab):
        raise DataFormatError("embedding shape does not match the header", path=path)
    return model, header
