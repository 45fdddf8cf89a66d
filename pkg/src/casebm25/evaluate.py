"""Micro-averaged precision / recall / F1 and dataset summary statistics."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Set, Tuple

from .corpus import Judgments
from .errors import DataError


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class EvalReport:
    correct_retrieved: int
    total_retrieved: int
    total_relevant: int

    @property
    def precision(self) -> float:
        return self.correct_retrieved / self.total_retrieved if self.total_retrieved else 0.0

    @property
    def recall(self) -> float:
        return self.correct_retrieved / self.total_relevant if self.total_relevant else 0.0

    @property
    def f1(self) -> float:
        return f1_score(self.precision, self.recall)

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "counts": {
                "correct_retrieved": self.correct_retrieved,
                "total_retrieved": self.total_retrieved,
                "total_relevant": self.total_relevant,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    def to_text(self) -> str:
        rows = [
            ("precision", f"{self.precision:.4f}"),
            ("recall", f"{self.recall:.4f}"),
            ("f1", f"{self.f1:.4f}"),
            ("correct_retrieved", str(self.correct_retrieved)),
            ("total_retrieved", str(self.total_retrieved)),
            ("total_relevant", str(self.total_relevant)),
        ]
        width = max(len(k) for k, _ in rows)
        return "".join(f"{k:<{width}}  {v}\n" for k, v in rows)


def micro_eval(answers: Mapping[str, Iterable[str]], judgments: Judgments) -> EvalReport:
    """Pool counts over all queries, then divide.

    The judged queries define the evaluation set: relevant counts come from
    every judged query, so a query with no answers still costs recall.
    """
    correct = retrieved = 0
    for qid, selected in answers.items():
        if qid not in judgments:
            raise DataError(f"answered query {qid!r} has no relevance judgments")
        selected = set(selected)
        retrieved += len(selected)
        correct += len(selected & judgments[qid])
    relevant = sum(len(v) for v in judgments.values())
    return EvalReport(correct, retrieved, relevant)


@dataclass(frozen=True)
class CorpusStats:
    base_cases: int
    candidate_cases: int
    relevant_cases: int

    @property
    def avg_relevant_per_base(self) -> float:
        return self.relevant_cases / self.base_cases if self.base_cases else 0.0

    def rows(self) -> List[Tuple[str, str]]:
        return [
            ("Number of base cases", str(self.base_cases)),
            ("Number of candidate cases", str(self.candidate_cases)),
            ("Number of relevant cases", str(self.relevant_cases)),
            ("Avg. relevant cases per base case", f"{self.avg_relevant_per_base:.1f}"),
        ]

    def to_text(self) -> str:
        rows = self.rows()
        width = max(len(k) for k, _ in rows)
        return "".join(f"{k:<{width}}  {v}\n" for k, v in rows)

    def to_dict(self) -> dict:
        return {
            "base_cases": self.base_cases,
            "candidate_cases": self.candidate_cases,
            "relevant_cases": self.relevant_cases,
            "avg_relevant_per_base": self.avg_relevant_per_base,
        }


def corpus_stats(corpus, judgments: Judgments) -> CorpusStats:
    """``corpus`` is the candidate pool: a list of Documents or a count."""
    n_cands = corpus if isinstance(corpus, int) else len(corpus)
    return CorpusStats(len(judgments), n_cands, sum(len(v) for v in judgments.values()))


def format_answers(answers: Mapping[str, List[str]]) -> str:
    """Submission lines ``base<TAB>candidate``; candidates keep the given order."""
    return "".join(f"{q}\t{c}\n" for q in sorted(answers) for c in answers[q])


def parse_answers(text: str, source: str = "<answers>") -> Dict[str, Set[str]]:
    out: Dict[str, Set[str]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise DataError(f"{source}:{lineno}: expected 'base<TAB>candidate'")
        out.setdefault(parts[0], set()).add(parts[1])
    return out


def read_answers(path) -> Dict[str, Set[str]]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"{path}: cannot read answers ({exc})") from exc
    return parse_answers(text, source=str(path))
