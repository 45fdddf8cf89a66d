"""Case-level relevance: max BM25 over (base segment, candidate segment) pairs."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .analysis import analyze
from .bm25 import Bm25Params, search
from .corpus import Segment
from .errors import RunFileError, UnknownCaseError
from .io import atomic_write_text
from .index import InvertedIndex

RUN_TAG = "casebm25"


@dataclass(frozen=True)
class CandidateScore:
    base_case: str
    candidate_case: str
    score: float
    # (base segment_index, candidate segment_index); None when read back from a run file
    argmax_pair: Optional[Tuple[int, int]] = None


@dataclass
class RankedList:
    base_case: str
    entries: List[CandidateScore] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def scores(self) -> List[float]:
        return [e.score for e in self.entries]

    @property
    def candidates(self) -> List[str]:
        return [e.candidate_case for e in self.entries]


def rank_key(entry: CandidateScore):
    return (-entry.score, entry.candidate_case)


def aggregate(
    base_case: str,
    base_segments: Sequence[Segment],
    index: InvertedIndex,
    params: Bm25Params,
    candidate_pool: Optional[Iterable[str]] = None,
    k_segments: Optional[int] = 1000,
) -> RankedList:
    """Rank candidate cases for one base case.

    Each base segment is run as a query with budget ``k_segments`` (None means
    unbounded); hits on the base case itself or outside ``candidate_pool``
    (default: the index's pool) are dropped, and each candidate keeps its best
    pair. Equal-scoring pairs resolve to the smallest (i, j), so the result
    does not depend on the order segments are processed in.
    """
    if base_case not in index.known_cases:
        raise UnknownCaseError(f"base case {base_case!r} is absent from the indexed corpus")
    pool = index.candidate_pool if candidate_pool is None else frozenset(candidate_pool)
    directory = index.directory
    best: Dict[str, Tuple[float, int, int]] = {}
    for seg in base_segments:
        if seg.document != base_case:
            raise ValueError(f"segment of {seg.document!r} passed for base case {base_case!r}")
        tokens = analyze(index.analyzer, seg.text)
        for hit in search(index, params, tokens, k_segments):
            ref = directory.refs[hit.segment_ref]
            cand = ref.case_id
            if cand == base_case or cand not in pool:
                continue
            pair = (hit.score, seg.segment_index, ref.segment_index)
            cur = best.get(cand)
            if cur is None or _better(pair, cur):
                best[cand] = pair
    entries = [
        CandidateScore(base_case, cand, s, (i, j)) for cand, (s, i, j) in best.items()
    ]
    entries.sort(key=rank_key)
    return RankedList(base_case, entries)


def _better(a: Tuple[float, int, int], b: Tuple[float, int, int]) -> bool:
    if a[0] != b[0]:
        return a[0] > b[0]
    return a[1:] < b[1:]


def format_run(ranked_lists: Iterable[RankedList], tag: str = RUN_TAG) -> str:
    lines = []
    for rl in ranked_lists:
        for rank, e in enumerate(rl.entries, 1):
            lines.append(f"{rl.base_case}\t{e.candidate_case}\t{rank}\t{e.score:.6f}\t{tag}\n")
    return "".join(lines)


def write_run(ranked_lists: Iterable[RankedList], path, tag: str = RUN_TAG) -> None:
    """TREC-style ``base<TAB>candidate<TAB>rank<TAB>score<TAB>tag`` lines, scores at 6 decimals."""
    atomic_write_text(path, format_run(ranked_lists, tag))


def parse_run(text: str, source: str = "<run>") -> Dict[str, RankedList]:
    lists: Dict[str, RankedList] = {}
    seen: Dict[str, set] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise RunFileError(f"{source}:{lineno}: expected 5 tab-separated fields, got {len(parts)}")
        base, cand, rank_s, score_s, _tag = parts
        if not base or not cand:
            raise RunFileError(f"{source}:{lineno}: empty case id")
        try:
            rank = int(rank_s)
            score = float(score_s)
        except ValueError:
            raise RunFileError(f"{source}:{lineno}: bad rank or score") from None
        rl = lists.setdefault(base, RankedList(base))
        if rank != len(rl.entries) + 1:
            raise RunFileError(
                f"{source}:{lineno}: rank {rank} out of sequence for {base!r} "
                f"(expected {len(rl.entries) + 1})"
            )
        seen_for_base = seen.setdefault(base, set())
        if cand in seen_for_base:
            raise RunFileError(f"{source}:{lineno}: duplicate candidate {cand!r} for {base!r}")
        seen_for_base.add(cand)
        rl.entries.append(CandidateScore(base, cand, score))
    return lists


def read_run(path) -> Dict[str, RankedList]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise RunFileError(f"{path}: cannot read run file ({exc})") from exc
    return parse_run(text, source=str(path))
