from typing import FrozenSet, List, Optional

import re
from functools import lru_cache
from importlib import resources

from notecnn.helpers import iter_text_lines

TOKEN_PATTERN = re.compile(r"[^\W_]+")


@lru_cache(maxsize=None)
def load_stopwords(path: Optional[str] = None) -> FrozenSet[str]:
    """Stop words, one per line. Defaults to the 179-word English list shipped with the package."""
    if path is None:
        text = resources.read_text("notecnn.textprep", "stopwords.txt", encoding="utf-8")
    else:
        text = "".join(line for _, line in iter_text_lines(path))
    return frozenset(line.strip().lower() for line in text.splitlines() if line.strip())


def tokenize(text: str, stopwords: Optional[FrozenSet[str]] = None) -> List[str]:
    """Lowercase, split on non-alphanumeric runs, drop stop words and pure numbers.

    Numbers with decimal points or slashes ("1.5", "12/5") split into digit runs and are dropped too.

    >>> tokenize("Lasix 40 mg PO daily")
    ['lasix', 'mg', 'po', 'daily']
    >>> tokenize("The patient was stable")
    ['patient', 'stable']
    """
    stop = load_stopwords() if stopwords is None else stopwords
    return [token for token in TOKEN_PATTERN.findall(text.lower()) if not token.isdigit() and token not in stop]
