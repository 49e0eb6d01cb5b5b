from typing import Any

import dataclasses
import datetime
import json
import logging
from decimal import Decimal
from enum import Enum
from pathlib import PurePath

import attrs
import numpy as np

logger = logging.getLogger()


def is_dataclass_instance(obj):
    return dataclasses.is_dataclass(obj) and not isinstance(obj, type)


def is_attrs_instance(obj):
    return attrs.has(type(obj))


class UniversalEncoder(json.JSONEncoder):
    """
    A JSON encoder that can handle additional types such as numpy arrays, attrs classes, and more.
    """

    def default(self, obj: Any):
        if isinstance(obj, str):
            return obj
        elif isinstance(obj, (set, frozenset)):
            return sorted(obj)
        elif isinstance(obj, Enum):
            try:
                return str(obj.value)
            except Exception:
                return str(obj)
        elif is_dataclass_instance(obj):
            return dataclasses.asdict(obj)
        elif is_attrs_instance(obj):
            return attrs.asdict(obj)
        elif isinstance(obj, (datetime.datetime, datetime.date, datetime.time)):
            return obj.isoformat()
        elif isinstance(obj, datetime.timedelta):
            return obj.total_seconds()
        elif isinstance(obj, Decimal):
            return float(obj)
        elif isinstance(obj, PurePath):
            return str(obj)
        elif isinstance(obj, bytes):
            return obj.decode(errors="ignore")
        elif isinstance(obj, np.ndarray):
            return obj.tolist()
        elif isinstance(obj, np.integer):
            return int(obj)
        elif isinstance(obj, np.floating):
            return float(obj)
        elif isinstance(obj, np.bool_):
            return bool(obj)
        elif callable(obj):
            return f"<callable {obj.__name__}>"
        else:
            return super().default(obj)


def json_dumps(obj, **kwargs) -> str:
    return json.dumps(obj, cls=UniversalEncoder, **kwargs) if not isinstance(obj, str) else obj


def canonical_json(obj) -> str:
    """Stable serialization used for hashing: sorted keys, no whitespace."""
    return json.dumps(obj, cls=UniversalEncoder, sort_keys=True, separators=(",", ":"))
