"""Classic BM25 over the segment index.

idf is the Robertson form ln((N - df + 0.5) / (df + 0.5)) with no flooring,
so terms in more than half of the segments carry negative weight. Repeated
query terms count once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional

import numpy as np

from .index import IndexStats, InvertedIndex


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 0.9
    b: float = 0.4

    def __post_init__(self):
        if self.k1 < 0:
            raise ValueError(f"k1 must be >= 0, got {self.k1}")
        if not 0 <= self.b <= 1:
            raise ValueError(f"b must be in [0, 1], got {self.b}")


@dataclass(frozen=True)
class SegmentHit:
    segment_ref: int
    score: float


def idf(stats: IndexStats, df_value: int) -> float:
    n = stats.segment_count
    if not 0 <= df_value <= n:
        raise ValueError(f"df={df_value} outside [0, N={n}]")
    return math.log((n - df_value + 0.5) / (df_value + 0.5))


def _query_terms(index: InvertedIndex, query_tokens: Iterable[str]) -> List[str]:
    # Fixed summation order keeps scores bit-identical across code paths.
    return sorted(t for t in set(query_tokens) if t in index.term_ids)


def _impacts(index: InvertedIndex, params: Bm25Params) -> np.ndarray:
    """Per-posting saturated tf component, cached on the index per (k1, b)."""
    key = ("impacts", params.k1, params.b)
    cached = index._cache.get(key)
    if cached is None:
        k1, b = params.k1, params.b
        avg = index.stats.avg_length
        lengths = index.stats.lengths[index.post_segments].astype(np.float64)
        tfs = index.post_tfs.astype(np.float64)
        norm = 1 - b + b * lengths / avg if avg > 0 else np.full_like(tfs, 1 - b)
        cached = tfs * (k1 + 1) / (tfs + k1 * norm)
        index._cache[key] = cached
    return cached


def score(index: InvertedIndex, params: Bm25Params, query_tokens, segment_ref: int) -> float:
    """BM25 of one segment against a query (reference path, one segment at a time)."""
    length = index.length(segment_ref)
    stats = index.stats
    k1, b = params.k1, params.b
    total = 0.0
    for term in _query_terms(index, query_tokens):
        tf = index.tf(term, segment_ref)
        if not tf:
            continue
        norm = 1 - b + b * length / stats.avg_length
        total += idf(stats, index.df(term)) * (tf * (k1 + 1) / (tf + k1 * norm))
    return total


def search(
    index: InvertedIndex, params: Bm25Params, query_tokens, k: Optional[int] = 1000
) -> List[SegmentHit]:
    """Top-``k`` segments sharing at least one term with the query.

    Ordered by score descending, then segment handle ascending. ``k=None``
    returns every matching segment.
    """
    if k is not None and k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    terms = _query_terms(index, query_tokens)
    if not terms:
        return []
    impacts = _impacts(index, params)
    n = index.stats.segment_count
    scores = np.zeros(n, dtype=np.float64)
    matched = np.zeros(n, dtype=bool)
    for term in terms:
        tid = index.term_ids[term]
        lo, hi = index.offsets[tid], index.offsets[tid + 1]
        segs = index.post_segments[lo:hi]
        w = idf(index.stats, int(hi - lo))
        scores[segs] += w * impacts[lo:hi]
        matched[segs] = True
    cand = np.flatnonzero(matched)
    cand_scores = scores[cand]
    if k is not None and len(cand) > k:
        # keep everything tied with the k-th best so the handle tie-break is exact
        kth = -np.partition(-cand_scores, k - 1)[k - 1]
        keep = cand_scores >= kth
        cand, cand_scores = cand[keep], cand_scores[keep]
    order = np.lexsort((cand, -cand_scores))
    if k is not None:
        order = order[:k]
    return [SegmentHit(int(h), float(s)) for h, s in zip(cand[order], cand_scores[order])]
