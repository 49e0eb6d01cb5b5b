from .chi_square import LabeledDoc, chi2_score, chi2_statistic, contingency_table, filter_correct, score_all, top_k_features, write_feature_report
from .frequency import frequency_report, write_frequency_report
from .metrics import confusion, evaluate, f1_score, format_table, report, round_half_away
