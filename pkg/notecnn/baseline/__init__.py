from .checkpoint import feature_hash, load_forest, save_forest
from .forest import DecisionTree, RandomForest, best_split, fit_tree, rf_predict, rf_train
from .sweep import SweepLogEntry, SweepResult, fit_baseline, predict_docs, sweep_features, sweep_folds
from .tfidf import TfidfModel, load_tfidf, save_tfidf, tfidf_fit, tfidf_transform
