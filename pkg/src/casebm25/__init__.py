"""Sentence-window BM25 retrieval for long legal cases.

Cases are cut into overlapping sentence windows, every window is indexed,
and a candidate's relevance to a base case is the best BM25 score over all
(base window, candidate window) pairs. A threshold / top-k / fraction-of-max
policy picks the final answers and is tuned by exhaustive grid search on
micro-F1.
"""

__version__ = "0.1.0"

from .aggregate import CandidateScore, RankedList, aggregate, read_run, write_run
from .analysis import AnalyzerConfig, analyze, term_vector
from .bm25 import Bm25Params, SegmentHit, idf, score, search
from .corpus import (
    Document,
    Segment,
    SegmentationParams,
    SentenceList,
    load_corpus,
    load_judgments,
    segment,
    split_sentences,
)
from .evaluate import EvalReport, corpus_stats, micro_eval
from .index import InvertedIndex, build_index, load, persist
from .selection import GridSpec, SelectionPolicy, grid_search, select

__all__ = [
    "AnalyzerConfig", "Bm25Params", "CandidateScore", "Document", "EvalReport", "GridSpec",
    "InvertedIndex", "RankedList", "Segment", "SegmentHit", "SegmentationParams",
    "SelectionPolicy", "SentenceList", "aggregate", "analyze", "build_index", "corpus_stats",
    "grid_search", "idf", "load", "load_corpus", "load_judgments", "micro_eval", "persist",
    "read_run", "score", "search", "segment", "select", "split_sentences", "term_vector",
    "write_run",
]
