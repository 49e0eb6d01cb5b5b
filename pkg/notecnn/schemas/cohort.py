from typing import Dict, List, Optional

from enum import Enum

from attrs import define, field, validators

from notecnn.constants import TASK_GENERAL


class NoteCategory(str, Enum):
    DISCHARGE_SUMMARY = "discharge_summary"
    OTHER = "other"


@define(frozen=True)
class NoteRecord:
    note_id: str
    category: NoteCategory = field(converter=NoteCategory)
    text: str = ""


@define(frozen=True)
class AdmissionRecord:
    patient_id: str
    admission_id: str
    # UTC seconds
    admit_time: int
    discharge_time: int
    icd9_codes: List[str] = field(factory=list)
    notes: List[NoteRecord] = field(factory=list)


@define(frozen=True)
class CohortSample:
    admission_id: str
    patient_id: str
    note_text: str
    label_general: bool
    label_30day: bool

    def label(self, task: str) -> bool:
        return self.label_general if task == TASK_GENERAL else self.label_30day


@define
class DatasetSplit:
    train: List[str]
    test: List[str]
    cv_folds: List[List[str]]
    seed: int
    task: Optional[str] = None
    ratio: float = 0.10


@define(frozen=True)
class CohortStats:
    """Heart-failure admission counts, with and without the discharge-summary restriction."""

    total: int = field(validator=validators.ge(0))
    total_with_summary: int = field(validator=validators.ge(0))
    general_positive: int = field(validator=validators.ge(0))
    general_positive_with_summary: int = field(validator=validators.ge(0))
    thirty_day_positive: int = field(validator=validators.ge(0))
    thirty_day_positive_with_summary: int = field(validator=validators.ge(0))

    def rows(self) -> List[Dict[str, object]]:
        return [
            {"row": "All admissions", "admissions": self.total, "with_summaries": self.total_with_summary},
            {"row": "Admissions followed by readmissions", "admissions": self.general_positive, "with_summaries": self.general_positive_with_summary},
            {"row": "Admissions followed by 30-day readmissions", "admissions": self.thirty_day_positive, "with_summaries": self.thirty_day_positive_with_summary},
        ]


@define(frozen=True)
class Provenance:
    config_hash: str
    seed: int
