from .io import read_admissions, read_cohort, read_split, write_cohort, write_split
from .labeling import build_cohort, cohort_stats, is_heart_failure, label_30day, label_general, select_note, validate_timeline
from .sampling import balance_undersample, make_cv_folds, split_holdout
