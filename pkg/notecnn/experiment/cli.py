from typing import List, Optional

import argparse
import logging
import sys

from notecnn.constants import EXIT_DATA, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, MODEL_BOTH, MODEL_CNN, MODEL_RF, NOTECNN_LOG_LEVEL, TASKS
from notecnn.exceptions import ArgumentError, DataFormatError, NumericError

from .config import apply_overrides, load_config
from .pipeline import PARTITION_TEST, PARTITION_TRAIN, cmd_cohort, cmd_evaluate, cmd_explain, cmd_synth, cmd_train

logger = logging.getLogger()


class UsageExitParser(argparse.ArgumentParser):
    """argparse parser that exits with the usage-error code instead of argparse's default 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Path to a JSON experiment config", type=str, default=None)
    parser.add_argument("--seed", help="Seed for every randomized stage", type=int, default=None)
    parser.add_argument("--task", help="Readmission task", choices=TASKS, default=None)
    parser.add_argument("--model", help="Model(s) to use", choices=(MODEL_CNN, MODEL_RF, MODEL_BOTH), default=None)
    parser.add_argument("--output-dir", dest="output_dir", help="Directory for all outputs", type=str, default=None)
    parser.add_argument("--admissions", help="Admissions JSON-lines file", type=str, default=None)
    parser.add_argument("--notes", help="Notes JSON-lines file", type=str, default=None)
    parser.add_argument("--embeddings", help="Plain-text embedding file", type=str, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = UsageExitParser(prog="notecnn", description="Heart failure readmission prediction from discharge summaries")
    commands = parser.add_subparsers(dest="command", parser_class=UsageExitParser)
    commands.required = True

    synth = commands.add_parser("synth", help="Generate a synthetic cohort")
    _common(synth)
    synth.add_argument("--patients", help="Number of synthetic patients", type=int, default=None)

    for name, text in (("cohort", "Label the cohort and write splits"), ("train", "Train the selected model(s)")):
        _common(commands.add_parser(name, help=text))

    evaluate = commands.add_parser("evaluate", help="Evaluate checkpoints on the holdout")
    _common(evaluate)
    evaluate.add_argument("--checkpoint", help="Checkpoint to evaluate (single model only)", type=str, default=None)
    evaluate.add_argument("--partition", choices=(PARTITION_TEST, PARTITION_TRAIN), default=PARTITION_TEST)
    evaluate.add_argument("--allow-train-eval", dest="allow_train_eval", action="store_true", default=None)

    explain = commands.add_parser("explain", help="Chi-square analysis of correct predictions")
    _common(explain)
    explain.add_argument("--checkpoint", help="Checkpoint used for training-set predictions", type=str, default=None)
    explain.add_argument("--k", help="Number of top features", type=int, default=None)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv``, run one subcommand and return its exit code."""
    logging.basicConfig(level=NOTECNN_LOG_LEVEL, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    checkpoint = getattr(args, "checkpoint", None)
    partition = getattr(args, "partition", PARTITION_TEST)
    overrides = argparse.Namespace(**{k: v for k, v in vars(args).items() if k not in ("command", "config", "checkpoint", "partition")})
    try:
        config = apply_overrides(load_config(args.config), overrides)
        if args.command == "synth":
            cmd_synth(config)
        elif args.command == "cohort":
            cmd_cohort(config)
        elif args.command == "train":
            cmd_train(config)
        elif args.command == "evaluate":
            cmd_evaluate(config, checkpoint=checkpoint, partition=partition)
        else:
            cmd_explain(config, checkpoint=checkpoint)
    except ArgumentError as e:
        logger.error(f"usage error: {e}")
        return EXIT_USAGE
    except (DataFormatError, FileNotFoundError) as e:
        logger.error(f"data error: {e}")
        return EXIT_DATA
    except NumericError as e:
        logger.error(f"numeric failure: {e}")
        return EXIT_NUMERIC
    return EXIT_OK
