from .cli import build_parser, run
from .config import apply_overrides, config_hash, load_config, provenance
from .pipeline import cmd_cohort, cmd_evaluate, cmd_explain, cmd_synth, cmd_train
