# flake8: noqa

"""
    notecnn

    Heart failure readmission prediction from discharge summaries: cohort labeling, a convolutional
    text classifier trained from scratch, a TF-IDF random forest baseline, and chi-square
    interpretation of correct predictions. Run ``notecnn --help`` for the command line.
"""
import sys
from importlib import metadata as importlib_metadata

from notecnn.experiment.cli import run


def get_version() -> str:
    try:
        return importlib_metadata.version("notecnn")
    except importlib_metadata.PackageNotFoundError:  # pragma: no cover
        return "unknown"


version: str = get_version()


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
