"""End-to-end steps shared by the command line and the tests."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

from .aggregate import RankedList, aggregate
from .analysis import AnalyzerConfig
from .bm25 import Bm25Params
from .corpus import Document, SegmentationParams, segment_document
from .errors import ConfigMismatchError, CorpusError
from .index import InvertedIndex, build_index


def index_cases(
    candidates: Sequence[Document],
    queries: Sequence[Document],
    segmentation: SegmentationParams,
    analyzer: AnalyzerConfig,
) -> InvertedIndex:
    """Index candidate cases, then base cases, each fully segmented.

    Only the candidates form the answer pool.
    """
    cand_ids = {d.case_id for d in candidates}
    clash = sorted(cand_ids & {d.case_id for d in queries})
    if clash:
        raise CorpusError(f"case ids present in both the pool and the queries: {clash[:5]}")
    segments = []
    for doc in list(candidates) + list(queries):
        segments.extend(segment_document(doc, segmentation))
    if not segments:
        raise CorpusError("empty index: the corpus produced no segments")
    return build_index(
        segments,
        analyzer,
        segmentation,
        candidate_pool=cand_ids,
        query_cases=[d.case_id for d in queries],
    )


def check_compatible(
    index: InvertedIndex, segmentation: SegmentationParams, analyzer: AnalyzerConfig
) -> None:
    if index.analyzer.fingerprint() != analyzer.fingerprint():
        raise ConfigMismatchError(
            f"analyzer settings {analyzer.to_dict()} differ from the index's "
            f"{index.analyzer.to_dict()}; rebuild the index or change the settings"
        )
    seg = index.segmentation
    if seg is not None and (seg.window_size, seg.stride) != (
        segmentation.window_size,
        segmentation.stride,
    ):
        raise ConfigMismatchError(
            f"window/stride {segmentation.window_size}/{segmentation.stride} differ from "
            f"the index's {seg.window_size}/{seg.stride}"
        )


def retrieve_one(
    query: Document,
    index: InvertedIndex,
    segmentation: SegmentationParams,
    params: Bm25Params,
    k_segments: Optional[int],
) -> RankedList:
    segments = segment_document(query, segmentation, query=True)
    return aggregate(query.case_id, segments, index, params, k_segments=k_segments)


def retrieve_all(
    queries: Sequence[Document],
    index: InvertedIndex,
    segmentation: SegmentationParams,
    params: Bm25Params,
    k_segments: Optional[int] = 1000,
    threads: int = 1,
) -> List[RankedList]:
    """Ranked lists in the order of ``queries``, independent of ``threads``."""

    def one(doc):
        return retrieve_one(doc, index, segmentation, params, k_segments)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, queries))
    return [one(q) for q in queries]
