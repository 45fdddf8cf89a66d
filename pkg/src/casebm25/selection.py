"""Answer selection by threshold / top-k / fraction-of-max, and grid tuning.

A candidate is kept only if it passes all three rules. ``alpha == 0`` and
``gamma == 0`` switch their rule off entirely, so (0, k, 0) is plain top-k
truncation even for lists with negative scores.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from .aggregate import RankedList
from .corpus import Judgments
from .errors import DataError
from .evaluate import micro_eval


@dataclass(frozen=True)
class SelectionPolicy:
    alpha: float = 0.0
    beta: int = 200
    gamma: float = 0.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if int(self.beta) != self.beta or self.beta < 1:
            raise ValueError(f"beta must be an integer >= 1, got {self.beta}")
        if not 0 <= self.gamma < 1:
            raise ValueError(f"gamma must be in [0, 1), got {self.gamma}")


def select_ranked(ranked: RankedList, policy: SelectionPolicy) -> List[str]:
    """Selected candidate ids in rank order."""
    if not ranked.entries:
        return []
    top = max(e.score for e in ranked.entries)
    out = []
    for rank, e in enumerate(ranked.entries, 1):
        if policy.alpha != 0 and not e.score > policy.alpha:
            continue
        if rank > policy.beta:
            continue
        if policy.gamma != 0 and not e.score >= policy.gamma * top:
            continue
        out.append(e.candidate_case)
    return out


def select(ranked: RankedList, policy: SelectionPolicy) -> Set[str]:
    return set(select_ranked(ranked, policy))


def default_alphas() -> Tuple[float, ...]:
    return tuple(round(0.1 * i, 1) for i in range(10))


def default_betas() -> Tuple[int, ...]:
    return (1,) + tuple(range(5, 201, 5))


def default_gammas() -> Tuple[float, ...]:
    return tuple(round(0.1 * i, 1) for i in range(10)) + (0.95, 0.99, 0.995, 0.999, 0.9995, 0.9999)


@dataclass(frozen=True)
class GridSpec:
    alphas: Tuple[float, ...] = field(default_factory=default_alphas)
    betas: Tuple[int, ...] = field(default_factory=default_betas)
    gammas: Tuple[float, ...] = field(default_factory=default_gammas)
    tuning_prefix: Optional[int] = 100

    def __post_init__(self):
        for name in ("alphas", "betas", "gammas"):
            values = tuple(sorted(set(getattr(self, name))))
            if not values:
                raise ValueError(f"grid {name} must be non-empty")
            object.__setattr__(self, name, values)
        for a in self.alphas:
            SelectionPolicy(alpha=a)
        for b in self.betas:
            SelectionPolicy(beta=b)
        for g in self.gammas:
            SelectionPolicy(gamma=g)
        if self.tuning_prefix is not None and self.tuning_prefix < 1:
            raise ValueError(f"tuning_prefix must be >= 1, got {self.tuning_prefix}")

    @property
    def size(self) -> int:
        return len(self.alphas) * len(self.betas) * len(self.gammas)

    def to_dict(self) -> dict:
        return {
            "alphas": list(self.alphas),
            "betas": list(self.betas),
            "gammas": list(self.gammas),
            "tuning_prefix": self.tuning_prefix,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "GridSpec":
        kwargs = {}
        for key in ("alphas", "betas", "gammas"):
            if key in d:
                kwargs[key] = tuple(d[key])
        if "tuning_prefix" in d:
            kwargs["tuning_prefix"] = d["tuning_prefix"]
        return cls(**kwargs)

    def grid_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class TuningResult:
    policy: SelectionPolicy
    f1: float
    grid_hash: str

    def to_json(self) -> str:
        d = {
            "alpha": self.policy.alpha,
            "beta": self.policy.beta,
            "gamma": self.policy.gamma,
            "f1": self.f1,
            "grid_hash": self.grid_hash,
        }
        return json.dumps(d, indent=1, sort_keys=True) + "\n"


def policy_from_json(text: str) -> SelectionPolicy:
    d = json.loads(text)
    return SelectionPolicy(float(d["alpha"]), int(d["beta"]), float(d["gamma"]))


def tuning_queries(judgments: Judgments, prefix: Optional[int]) -> List[str]:
    qids = sorted(judgments)
    return qids if prefix is None else qids[:prefix]


def _query_counts(ranked: Optional[RankedList], relevant: Set[str], grid: GridSpec):
    """Selected-set size and hit count of one query for every grid triple.

    On a score-sorted list each rule keeps a prefix, so the selection is the
    shortest of the three prefixes.
    """
    shape = (len(grid.alphas), len(grid.betas), len(grid.gammas))
    if ranked is None or not ranked.entries:
        return np.zeros(shape, dtype=np.int64), np.zeros(shape, dtype=np.int64)
    scores = np.array(ranked.scores, dtype=np.float64)
    if np.any(np.diff(scores) > 0):
        raise DataError(f"ranked list of {ranked.base_case!r} is not sorted by score")
    n = len(scores)
    neg = -scores
    alphas = np.array(grid.alphas, dtype=np.float64)
    by_alpha = np.where(alphas == 0, n, np.searchsorted(neg, -alphas, side="left"))
    by_beta = np.minimum(np.array(grid.betas, dtype=np.int64), n)
    gammas = np.array(grid.gammas, dtype=np.float64)
    thresholds = gammas * scores.max()
    by_gamma = np.where(gammas == 0, n, np.searchsorted(neg, -thresholds, side="right"))
    kept = np.minimum(
        np.minimum(by_alpha[:, None, None], by_beta[None, :, None]), by_gamma[None, None, :]
    ).astype(np.int64)
    hits = np.concatenate([[0], np.cumsum([c in relevant for c in ranked.candidates])])
    return kept, hits[kept].astype(np.int64)


def grid_search(
    ranked_lists: Mapping[str, RankedList],
    judgments: Judgments,
    grid: GridSpec,
    threads: int = 1,
) -> TuningResult:
    """Exhaustive sweep over ``grid`` maximising micro-F1.

    Tuning set: the first ``grid.tuning_prefix`` judged query ids in sorted
    order; a query without a ranked list selects nothing. Ties go to the
    smallest (alpha, beta, gamma).
    """
    qids = tuning_queries(judgments, grid.tuning_prefix)
    if not qids:
        raise DataError("grid search: no tuning query has relevance judgments")

    def one(qid):
        return _query_counts(ranked_lists.get(qid), judgments[qid], grid)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(one, qids))
    else:
        parts = [one(q) for q in qids]
    retrieved = sum(p[0] for p in parts)
    correct = sum(p[1] for p in parts)
    relevant = sum(len(judgments[q]) for q in qids)

    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(retrieved > 0, correct / np.maximum(retrieved, 1), 0.0)
        recall = correct / relevant if relevant else np.zeros_like(precision)
        denom = precision + recall
        f1 = np.where(denom > 0, 2 * precision * recall / np.where(denom > 0, denom, 1), 0.0)
    flat = int(np.argmax(f1))
    a, b, g = np.unravel_index(flat, f1.shape)
    policy = SelectionPolicy(grid.alphas[a], int(grid.betas[b]), grid.gammas[g])
    return TuningResult(policy, float(f1[a, b, g]), grid.grid_hash())


def evaluate_policy(
    ranked_lists: Mapping[str, RankedList],
    judgments: Judgments,
    policy: SelectionPolicy,
    queries: Sequence[str],
):
    """Micro-F1 report of one policy over ``queries`` (rule-by-rule route)."""
    answers = {
        q: select(ranked_lists[q], policy) if q in ranked_lists else set() for q in queries
    }
    return micro_eval(answers, {q: judgments[q] for q in queries})
