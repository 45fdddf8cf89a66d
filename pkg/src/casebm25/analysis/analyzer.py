"""Text to index terms: lowercase, possessive strip, split, stopword filter, stem."""

from __future__ import annotations

import hashlib
import json
import re
from collections import Counter
from dataclasses import asdict, dataclass
from functools import lru_cache
from importlib import resources
from typing import Dict, FrozenSet, List

from .porter import stem as porter_stem

STOPWORD_LISTS = ("english", "none")

_POSSESSIVE = re.compile(r"(?<=[^\W_])['’]s\b", re.IGNORECASE)
_TOKEN = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class AnalyzerConfig:
    lowercase: bool = True
    stem: bool = True
    stopwords: str = "english"

    def __post_init__(self):
        if self.stopwords not in STOPWORD_LISTS:
            raise ValueError(
                f"unknown stopword list {self.stopwords!r}; expected one of {STOPWORD_LISTS}"
            )

    def to_dict(self) -> dict:
        return asdict(self)

    def fingerprint(self) -> str:
        """Hash of the settings plus the stopword list contents."""
        payload = dict(self.to_dict(), stopword_terms=sorted(load_stopwords(self.stopwords)))
        blob = json.dumps(payload, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


@lru_cache(maxsize=None)
def load_stopwords(name: str) -> FrozenSet[str]:
    if name == "none":
        return frozenset()
    text = resources.files(__package__).joinpath("stopwords", f"{name}.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


def analyze(config: AnalyzerConfig, text: str) -> List[str]:
    if config.lowercase:
        text = text.lower()
    text = _POSSESSIVE.sub("", text)
    stop = load_stopwords(config.stopwords)
    tokens = [t for t in _TOKEN.findall(text) if t not in stop]
    if config.stem:
        tokens = [porter_stem(t) for t in tokens]
    return tokens


def term_vector(tokens) -> Dict[str, int]:
    return dict(Counter(tokens))
