from typing import Any, Dict, List, Optional

import logging
import os

from attrs import asdict, define, field, has

from notecnn.helpers import PROVENANCE_KEY
from notecnn.utils.universal_encoder import json_dumps

logger = logging.getLogger()


@define
class RunLogger:
    """Appends one JSON-lines record per training epoch or sweep setting.

    Every record carries the provenance fields (config hash, seed). Without a path records are
    only kept in memory.
    """

    path: Optional[str] = None
    provenance: Dict[str, Any] = field(factory=dict)
    records: List[Dict[str, Any]] = field(init=False, factory=list)

    def __attrs_post_init__(self):
        if self.path:
            os.makedirs(os.path.dirname(os.path.abspath(self.path)), exist_ok=True)
            with open(self.path, "w", encoding="utf-8", newline="\n") as f:
                f.write(json_dumps({PROVENANCE_KEY: self.provenance}, sort_keys=True) + "\n")

    def record_log(self, data: Any) -> None:
        record = asdict(data) if has(type(data)) else dict(data)
        record.update(self.provenance)
        self.records.append(record)
        logger.debug(f"run log: {json_dumps(record, sort_keys=True)}")
        if self.path:
            with open(self.path, "a", encoding="utf-8", newline="\n") as f:
                f.write(json_dumps(record, sort_keys=True) + "\n")
