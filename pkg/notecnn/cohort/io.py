from typing import Any, Dict, List, Optional, Sequence

import logging
import os
from collections import defaultdict

from cattrs import GenConverter

from notecnn.exceptions import DataFormatError
from notecnn.helpers import parse_utc_timestamp, read_json, read_jsonl, write_json, write_jsonl
from notecnn.schemas import AdmissionRecord, CohortSample, DatasetSplit, NoteRecord

logger = logging.getLogger()

converter = GenConverter()

ADMISSION_FIELDS = ("patient_id", "admission_id", "admit_time", "discharge_time", "icd9_codes")


def _structure_note(obj: Dict[str, Any]) -> NoteRecord:
    return converter.structure({"note_id": str(obj["note_id"]), "category": obj["category"], "text": obj.get("text") or ""}, NoteRecord)


def _structure_admission(obj: Dict[str, Any], notes: List[NoteRecord]) -> AdmissionRecord:
    missing = [name for name in ADMISSION_FIELDS if name not in obj]
    if missing:
        raise KeyError(", ".join(missing))
    return AdmissionRecord(
        patient_id=str(obj["patient_id"]),
        admission_id=str(obj["admission_id"]),
        admit_time=parse_utc_timestamp(obj["admit_time"]),
        discharge_time=parse_utc_timestamp(obj["discharge_time"]),
        icd9_codes=[str(code) for code in obj["icd9_codes"]],
        notes=notes,
    )


def read_notes(path: str) -> Dict[str, List[NoteRecord]]:
    notes: Dict[str, List[NoteRecord]] = defaultdict(list)
    for line_no, obj in read_jsonl(path):
        try:
            notes[str(obj["admission_id"])].append(_structure_note(obj))
        except Exception as e:
            raise DataFormatError(f"invalid note record ({type(e).__name__}: {e})", path=path, line=line_no) from e
    return dict(notes)


def read_admissions(path: str, notes_path: Optional[str] = None) -> List[AdmissionRecord]:
    """Read admissions JSON-lines; notes come inline or from a second JSON-lines file keyed by admission_id."""
    external = read_notes(notes_path) if notes_path else {}
    admissions: List[AdmissionRecord] = []
    for line_no, obj in read_jsonl(path):
        try:
            inline = [_structure_note(note) for note in obj.get("notes") or []]
            notes = inline + external.pop(str(obj.get("admission_id")), [])
            admissions.append(_structure_admission(obj, notes))
        except Exception as e:
            raise DataFormatError(f"invalid admission record ({type(e).__name__}: {e})", path=path, line=line_no) from e
    if external:
        logger.warning(f"{len(external)} admission ids in {notes_path} have no matching admission; their notes are ignored")
    return admissions


def write_cohort(path: str, samples: Sequence[CohortSample], provenance: Optional[Dict[str, Any]] = None) -> None:
    write_jsonl(path, (converter.unstructure(sample) for sample in samples), provenance)


def read_cohort(path: str, ids: Optional[Sequence[str]] = None) -> List[CohortSample]:
    """Read cohort samples, optionally only those whose admission_id is in ids (kept in file order)."""
    wanted = set(ids) if ids is not None else None
    samples = []
    for line_no, obj in read_jsonl(path):
        if wanted is not None and obj.get("admission_id") not in wanted:
            continue
        try:
            samples.append(converter.structure(obj, CohortSample))
        except Exception as e:
            raise DataFormatError(f"invalid cohort sample ({type(e).__name__}: {e})", path=path, line=line_no) from e
    if wanted is not None and len(samples) != len(wanted):
        raise DataFormatError(f"{len(wanted) - len(samples)} requested samples are missing from the cohort file", path=path)
    return samples


def write_split(path: str, split: DatasetSplit, provenance: Optional[Dict[str, Any]] = None) -> None:
    write_json(path, converter.unstructure(split), provenance)


def read_split(path: str) -> DatasetSplit:
    obj = read_json(path)
    obj.pop("provenance", None)
    try:
        split = converter.structure(obj, DatasetSplit)
    except Exception as e:
        raise DataFormatError(f"invalid split file ({type(e).__name__}: {e})", path=path) from e
    if set(split.train) & set(split.test):
        raise DataFormatError("train and test partitions overlap", path=path)
    return split


def default_input_paths(output_dir: str, admissions: Optional[str], notes: Optional[str]):
    admissions = admissions or os.path.join(output_dir, "admissions.jsonl")
    if notes is None:
        candidate = os.path.join(output_dir, "notes.jsonl")
        notes = candidate if os.path.exists(candidate) else None
    return admissions, notes
