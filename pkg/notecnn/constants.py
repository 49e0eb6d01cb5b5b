from typing import FrozenSet

import os

from dotenv import load_dotenv

load_dotenv()


def str2bool(v):
    if isinstance(v, bool):
        return v
    if not v or not isinstance(v, str):
        return False
    return v.lower() in ("yes", "true", "t", "1")


NOTECNN_LOG_LEVEL = os.getenv("NOTECNN_LOG_LEVEL", "INFO").upper()
NOTECNN_DISABLE_PROGRESS = str2bool(os.getenv("NOTECNN_DISABLE_PROGRESS", False))
NOTECNN_N_WORKERS = int(os.getenv("NOTECNN_N_WORKERS", "4"))

# Qualifying congestive heart failure diagnosis codes.
HEART_FAILURE_ICD9_CODES: FrozenSet[str] = frozenset(
    {
        "398.91",
        "402.01",
        "402.11",
        "402.91",
        "404.01",
        "404.03",
        "404.11",
        "404.13",
        "404.91",
        "404.93",
        "428.0",
        "428.1",
        "428.20",
        "428.21",
        "428.22",
        "428.23",
        "428.30",
        "428.31",
        "428.32",
        "428.33",
        "428.40",
        "428.41",
        "428.42",
        "428.43",
        "428.9",
    }
)

SECONDS_PER_DAY = 86400
READMISSION_WINDOW_DAYS = 30

TASK_GENERAL = "general"
TASK_30DAY = "30day"
TASKS = (TASK_GENERAL, TASK_30DAY)

MODEL_CNN = "cnn"
MODEL_RF = "rf"
MODEL_BOTH = "both"

PAD_ID = 0
UNK_ID = 1
PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"

# binary container formats: 4 magic bytes then a little-endian u16 version
ENCODED_MAGIC = b"NCNN"
ENCODED_VERSION = 2
CNN_CHECKPOINT_MAGIC = b"NCNM"
CNN_CHECKPOINT_VERSION = 1
FOREST_CHECKPOINT_MAGIC = b"NCRF"
FOREST_CHECKPOINT_VERSION = 1

DEFAULT_N_MAX = 2000
DEFAULT_EMBEDDING_DIM = 200
OOV_INIT_RANGE = 0.25

DEFAULT_FEATURE_COUNTS = (10000, 15000, 20000, 25000)
DEFAULT_TOP_K_FEATURES = 20
DEFAULT_FREQUENCY_MASK = 2000

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3
