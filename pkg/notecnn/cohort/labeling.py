from typing import Dict, Iterable, List, Optional, Sequence

import logging
from collections import defaultdict

from notecnn.constants import HEART_FAILURE_ICD9_CODES, READMISSION_WINDOW_DAYS, SECONDS_PER_DAY
from notecnn.exceptions import ArgumentError, CohortValidationError
from notecnn.schemas import AdmissionRecord, CohortSample, CohortStats, NoteCategory, NoteRecord

logger = logging.getLogger()

READMISSION_WINDOW_SECONDS = READMISSION_WINDOW_DAYS * SECONDS_PER_DAY


def is_heart_failure(admission: AdmissionRecord) -> bool:
    return any(code.strip() in HEART_FAILURE_ICD9_CODES for code in admission.icd9_codes)


def select_note(admission: AdmissionRecord) -> Optional[NoteRecord]:
    """Longest discharge summary of the admission, smallest note_id on ties; None when there is none."""
    summaries = [note for note in admission.notes if note.category == NoteCategory.DISCHARGE_SUMMARY]
    if not summaries:
        return None
    return min(summaries, key=lambda note: (-len(note.text), note.note_id))


def validate_timeline(admissions_of_patient: Sequence[AdmissionRecord]) -> None:
    if not admissions_of_patient:
        return
    patient_id = admissions_of_patient[0].patient_id
    previous: Optional[AdmissionRecord] = None
    for admission in admissions_of_patient:
        if admission.patient_id != patient_id:
            raise ArgumentError(f"timeline mixes patients {patient_id} and {admission.patient_id}")
        if admission.discharge_time < admission.admit_time:
            raise CohortValidationError(f"admission {admission.admission_id} is discharged before it is admitted")
        if previous is not None:
            if admission.admit_time < previous.admit_time:
                raise ArgumentError(f"timeline of patient {patient_id} is not sorted by admit_time")
            if admission.admit_time < previous.discharge_time:
                raise CohortValidationError(f"admissions {previous.admission_id} and {admission.admission_id} of patient {patient_id} overlap")
        previous = admission


def _next_admission_gaps(admissions_of_patient: Sequence[AdmissionRecord]) -> Dict[str, Optional[int]]:
    """Seconds from each discharge to the earliest later admission, None when there is none."""
    validate_timeline(admissions_of_patient)
    gaps: Dict[str, Optional[int]] = {}
    for i, admission in enumerate(admissions_of_patient):
        gap = None
        for later in admissions_of_patient[i + 1 :]:
            if later.admit_time > admission.discharge_time:
                gap = later.admit_time - admission.discharge_time
                break
        gaps[admission.admission_id] = gap
    return gaps


def label_general(admissions_of_patient: Sequence[AdmissionRecord]) -> Dict[str, bool]:
    return {admission_id: gap is not None for admission_id, gap in _next_admission_gaps(admissions_of_patient).items()}


def label_30day(admissions_of_patient: Sequence[AdmissionRecord]) -> Dict[str, bool]:
    return {admission_id: gap is not None and gap <= READMISSION_WINDOW_SECONDS for admission_id, gap in _next_admission_gaps(admissions_of_patient).items()}


def group_by_patient(admissions: Iterable[AdmissionRecord]) -> Dict[str, List[AdmissionRecord]]:
    """Group admissions into per-patient timelines sorted by admit_time; rejects duplicate admission ids."""
    seen = set()
    timelines: Dict[str, List[AdmissionRecord]] = defaultdict(list)
    for admission in admissions:
        if admission.admission_id in seen:
            raise CohortValidationError(f"duplicate admission_id {admission.admission_id}")
        seen.add(admission.admission_id)
        timelines[admission.patient_id].append(admission)
    for timeline in timelines.values():
        timeline.sort(key=lambda a: (a.admit_time, a.discharge_time, a.admission_id))
    return dict(timelines)


def build_cohort(admissions: Iterable[AdmissionRecord]) -> List[CohortSample]:
    """Label every heart-failure admission against all later admissions of its patient.

    Any later admission counts as a readmission, heart failure or not. Admissions without a
    discharge summary are dropped after labeling.
    """
    samples: List[CohortSample] = []
    excluded = 0
    timelines = group_by_patient(admissions)
    for patient_id in sorted(timelines):
        timeline = timelines[patient_id]
        general = label_general(timeline)
        thirty = label_30day(timeline)
        for admission in timeline:
            if not is_heart_failure(admission):
                continue
            note = select_note(admission)
            if note is None or not note.text:
                excluded += 1
                continue
            samples.append(
                CohortSample(
                    admission_id=admission.admission_id,
                    patient_id=admission.patient_id,
                    note_text=note.text,
                    label_general=general[admission.admission_id],
                    label_30day=thirty[admission.admission_id],
                )
            )
    if excluded:
        logger.info(f"Excluded {excluded} heart failure admissions without a discharge summary")
    return samples


def cohort_stats(admissions: Iterable[AdmissionRecord]) -> CohortStats:
    counts = defaultdict(int)
    timelines = group_by_patient(admissions)
    for timeline in timelines.values():
        general = label_general(timeline)
        thirty = label_30day(timeline)
        for admission in timeline:
            if not is_heart_failure(admission):
                continue
            note = select_note(admission)
            has_summary = note is not None and bool(note.text)
            flags = {"total": True, "general_positive": general[admission.admission_id], "thirty_day_positive": thirty[admission.admission_id]}
            for name, flag in flags.items():
                if flag:
                    counts[name] += 1
                    if has_summary:
                        counts[f"{name}_with_summary"] += 1
    return CohortStats(
        total=counts["total"],
        total_with_summary=counts["total_with_summary"],
        general_positive=counts["general_positive"],
        general_positive_with_summary=counts["general_positive_with_summary"],
        thirty_day_positive=counts["thirty_day_positive"],
        thirty_day_positive_with_summary=counts["thirty_day_positive_with_summary"],
    )
