from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import csv
import hashlib
import json
import os
from datetime import datetime

import pytz
from tqdm import tqdm

from notecnn.constants import NOTECNN_DISABLE_PROGRESS
from notecnn.exceptions import DataFormatError
from notecnn.utils.universal_encoder import canonical_json, json_dumps

PROVENANCE_KEY = "provenance"


def parse_utc_timestamp(value: str) -> int:
    """Parse an ISO-8601 string to integer UTC seconds. Naive timestamps are taken to be UTC."""
    text = value.strip()
    if text.endswith("Z") or text.endswith("z"):
        text = text[:-1] + "+00:00"
    parsed = datetime.fromisoformat(text)
    if parsed.tzinfo is None:
        parsed = pytz.utc.localize(parsed)
    return int(parsed.astimezone(pytz.utc).timestamp())


def format_utc_timestamp(seconds: int) -> str:
    return datetime.fromtimestamp(seconds, tz=pytz.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def sha256_hex(data: bytes, length: Optional[int] = 16) -> str:
    digest = hashlib.sha256(data).hexdigest()
    return digest[:length] if length else digest


def hash_ids(ids: Iterable[str]) -> str:
    return sha256_hex("\n".join(sorted(ids)).encode("utf-8"))


def hash_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()[:16]


def hash_object(obj: Any) -> str:
    return sha256_hex(canonical_json(obj).encode("utf-8"))


def progress(iterable=None, **kwargs):
    return tqdm(iterable, disable=NOTECNN_DISABLE_PROGRESS, dynamic_ncols=True, **kwargs)


def iter_text_lines(path: str) -> Iterator[Tuple[int, str]]:
    """Yield (1-based line number, decoded line); a line that is not valid UTF-8 is a DataFormatError."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"No such file: {path}")
    with open(path, "rb") as file:
        for line_no, raw in enumerate(file, start=1):
            try:
                yield line_no, raw.decode("utf-8")
            except UnicodeDecodeError as e:
                raise DataFormatError(f"invalid UTF-8 at byte {e.start}", path=path, line=line_no) from e


def read_jsonl(path: str) -> Iterator[Tuple[int, Dict[str, Any]]]:
    """Yield (1-based line number, object) for each non-blank line, skipping the provenance header."""
    for line_no, line in iter_text_lines(path):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise DataFormatError(f"invalid JSON: {e.msg}", path=path, line=line_no) from e
        if not isinstance(obj, dict):
            raise DataFormatError("expected a JSON object", path=path, line=line_no)
        if line_no == 1 and set(obj.keys()) == {PROVENANCE_KEY}:
            continue
        yield line_no, obj


def write_jsonl(path: str, records: Iterable[Any], provenance: Optional[Dict[str, Any]] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as file:
        if provenance is not None:
            file.write(json_dumps({PROVENANCE_KEY: provenance}, sort_keys=True) + "\n")
        for record in records:
            file.write(json_dumps(record, sort_keys=True) + "\n")


def write_json(path: str, obj: Dict[str, Any], provenance: Optional[Dict[str, Any]] = None) -> None:
    payload = dict(obj)
    if provenance is not None:
        payload[PROVENANCE_KEY] = provenance
    with open(path, "w", encoding="utf-8", newline="\n") as file:
        file.write(json_dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path: str) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise FileNotFoundError(f"No such file: {path}")
    with open(path, "rb") as file:
        data = file.read()
    try:
        obj = json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise DataFormatError(f"invalid UTF-8 at byte {e.start}", path=path, line=data.count(b"\n", 0, e.start) + 1) from e
    except json.JSONDecodeError as e:
        raise DataFormatError(f"invalid JSON: {e.msg}", path=path, line=e.lineno) from e
    if not isinstance(obj, dict):
        raise DataFormatError("expected a JSON object", path=path)
    return obj


def write_rows_to_csv(path_csv: str, columns: Sequence[str], rows: Iterable[Dict[str, Any]], provenance: Optional[Dict[str, Any]] = None) -> None:
    with open(path_csv, "w", newline="", encoding="utf-8") as file:
        if provenance is not None:
            file.write("# " + ",".join(f"{k}={provenance[k]}" for k in sorted(provenance)) + "\n")
        writer = csv.DictWriter(file, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def read_csv_rows(path_csv: str) -> List[Dict[str, str]]:
    lines = [line for _, line in iter_text_lines(path_csv) if not line.startswith("#")]
    return list(csv.DictReader(lines))
