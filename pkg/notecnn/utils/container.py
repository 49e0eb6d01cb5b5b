from typing import Any, Dict, Tuple

import json
import os
import struct
from collections import OrderedDict

import numpy as np

from notecnn.exceptions import DataFormatError
from notecnn.utils.universal_encoder import json_dumps

# magic, version, header byte length
_PREAMBLE = struct.Struct("<4sHI")
_DTYPES = ("<f8", "<i8")


def write_container(path: str, magic: bytes, version: int, header: Dict[str, Any], arrays: "OrderedDict[str, np.ndarray]") -> None:
    """Write ``magic | u16 version | u32 header length | JSON header | raw little-endian arrays``.

    The header gains an ``arrays`` entry listing name, dtype and shape of each array in write order.
    """
    specs = []
    blobs = []
    for name, value in arrays.items():
        dtype = "<f8" if np.issubdtype(value.dtype, np.floating) else "<i8"
        data = np.ascontiguousarray(value, dtype=dtype)
        specs.append({"name": name, "dtype": dtype, "shape": list(data.shape)})
        blobs.append(data.tobytes())
    raw_header = json_dumps({**header, "arrays": specs}, sort_keys=True, separators=(",", ":")).encode("utf-8")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "wb") as f:
        f.write(_PREAMBLE.pack(magic, version, len(raw_header)))
        f.write(raw_header)
        for blob in blobs:
            f.write(blob)


def read_container(path: str, magic: bytes, version: int) -> Tuple[Dict[str, Any], "OrderedDict[str, np.ndarray]"]:
    if not os.path.exists(path):
        raise FileNotFoundError(f"No such file: {path}")
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < _PREAMBLE.size:
        raise DataFormatError("truncated file", path=path)
    found_magic, found_version, header_len = _PREAMBLE.unpack_from(data)
    if found_magic != magic:
        raise DataFormatError(f"bad magic {found_magic!r}, expected {magic!r}", path=path)
    if found_version != version:
        raise DataFormatError(f"unsupported version {found_version}, expected {version}", path=path)
    offset = _PREAMBLE.size
    try:
        header = json.loads(data[offset : offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DataFormatError(f"unreadable header: {e}", path=path) from e
    offset += header_len

    arrays = OrderedDict()
    for spec in header.get("arrays", []):
        if spec.get("dtype") not in _DTYPES:
            raise DataFormatError(f"unsupported array dtype {spec.get('dtype')!r}", path=path)
        dtype = np.dtype(spec["dtype"])
        shape = tuple(spec["shape"])
        size = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        if offset + size > len(data):
            raise DataFormatError(f"array {spec['name']} extends past end of file", path=path)
        arrays[spec["name"]] = np.frombuffer(data, dtype=dtype, count=size // dtype.itemsize, offset=offset).reshape(shape).astype(dtype.newbyteorder("="))
        offset += size
    if offset != len(data):
        raise DataFormatError(f"{len(data) - offset} trailing bytes", path=path)
    return header, arrays
