"""Segment-level inverted index and its on-disk format.

Every indexed unit is a sentence-window segment, so N, avg length and df
are all counted over segments, not over whole cases.

On-disk layout (``FORMAT_VERSION`` 1), one directory:

    manifest.json   format tag/version, analyzer + segmentation settings,
                    counts, candidate pool, size and sha256 of each file below
    terms.tsv       ``term<TAB>df`` per line, terms in sorted order; the
                    postings of term i are the df_i rows following those of
                    terms 0..i-1
    postings.npy    int32 array of shape (P, 2): (segment handle, tf) rows
    lengths.npy     int32 array of shape (N,): token count of each segment
    segments.tsv    ``case_id<TAB>segment_index<TAB>start<TAB>end``, row = handle
"""

from __future__ import annotations

import hashlib
import io
import json
import os
import shutil
import tempfile
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .analysis import AnalyzerConfig, analyze
from .corpus import Segment, SegmentationParams
from .errors import IndexFormatError

FORMAT_NAME = "casebm25-index"
FORMAT_VERSION = 1
_FILES = ("terms.tsv", "postings.npy", "lengths.npy", "segments.tsv")


@dataclass(frozen=True)
class PostingList:
    term: str
    postings: Tuple[Tuple[int, int], ...]

    @property
    def df(self) -> int:
        return len(self.postings)


@dataclass(frozen=True)
class SegmentRef:
    case_id: str
    segment_index: int
    start: int
    end: int


class IndexStats:
    def __init__(self, lengths: np.ndarray):
        self.lengths = lengths
        self.segment_count = int(len(lengths))
        self.total_length = int(lengths.sum(dtype=np.int64))
        self.avg_length = self.total_length / self.segment_count if self.segment_count else 0.0

    def __repr__(self):
        return (
            f"IndexStats(segment_count={self.segment_count}, "
            f"total_length={self.total_length}, avg_length={self.avg_length:.4f})"
        )


class SegmentDirectory:
    """Dense handles 0..N-1 <-> (case_id, segment_index, sentence range)."""

    def __init__(self, refs: Sequence[SegmentRef]):
        self.refs: Tuple[SegmentRef, ...] = tuple(refs)
        self._handles: Dict[Tuple[str, int], int] = {}
        self._by_case: Dict[str, List[int]] = {}
        for h, ref in enumerate(self.refs):
            key = (ref.case_id, ref.segment_index)
            if key in self._handles:
                raise ValueError(f"duplicate segment {key}")
            self._handles[key] = h
            self._by_case.setdefault(ref.case_id, []).append(h)
        self.case_ids: Tuple[str, ...] = tuple(sorted(self._by_case))

    def __len__(self) -> int:
        return len(self.refs)

    def __getitem__(self, handle: int) -> SegmentRef:
        if not 0 <= handle < len(self.refs):
            raise IndexError(f"segment handle {handle} out of range [0, {len(self.refs)})")
        return self.refs[handle]

    def handle(self, case_id: str, segment_index: int) -> int:
        return self._handles[(case_id, segment_index)]

    def handles_of(self, case_id: str) -> List[int]:
        return list(self._by_case.get(case_id, ()))

    def __contains__(self, case_id: str) -> bool:
        return case_id in self._by_case


class InvertedIndex:
    """Immutable once built; safe to share between threads."""

    def __init__(
        self,
        terms: List[str],
        offsets: np.ndarray,
        post_segments: np.ndarray,
        post_tfs: np.ndarray,
        lengths: np.ndarray,
        directory: SegmentDirectory,
        analyzer: AnalyzerConfig,
        segmentation: Optional[SegmentationParams] = None,
        candidate_pool: Optional[Iterable[str]] = None,
        query_cases: Iterable[str] = (),
    ):
        self.terms = terms
        self.term_ids = {t: i for i, t in enumerate(terms)}
        self.offsets = offsets
        self.post_segments = post_segments
        self.post_tfs = post_tfs
        self.stats = IndexStats(lengths)
        self.directory = directory
        self.analyzer = analyzer
        self.segmentation = segmentation
        self.query_cases = frozenset(query_cases)
        if candidate_pool is None:
            candidate_pool = [c for c in directory.case_ids if c not in self.query_cases]
        self.candidate_pool = frozenset(candidate_pool)
        # every case submitted for indexing, including ones that produced no segment
        self.known_cases = self.candidate_pool | self.query_cases | frozenset(directory.case_ids)
        self._cache: dict = {}

    @property
    def segment_count(self) -> int:
        return self.stats.segment_count

    def _check_handle(self, handle: int) -> None:
        if not 0 <= handle < self.stats.segment_count:
            raise IndexError(
                f"segment handle {handle} out of range [0, {self.stats.segment_count})"
            )

    def postings(self, term: str) -> Tuple[np.ndarray, np.ndarray]:
        """(segment handles, tfs) for ``term``; empty arrays if unseen."""
        tid = self.term_ids.get(term)
        if tid is None:
            return self.post_segments[:0], self.post_tfs[:0]
        lo, hi = self.offsets[tid], self.offsets[tid + 1]
        return self.post_segments[lo:hi], self.post_tfs[lo:hi]

    def posting_list(self, term: str) -> PostingList:
        segs, tfs = self.postings(term)
        return PostingList(term, tuple(zip(segs.tolist(), tfs.tolist())))

    def df(self, term: str) -> int:
        tid = self.term_ids.get(term)
        if tid is None:
            return 0
        return int(self.offsets[tid + 1] - self.offsets[tid])

    def tf(self, term: str, handle: int) -> int:
        self._check_handle(handle)
        segs, tfs = self.postings(term)
        pos = int(np.searchsorted(segs, handle))
        if pos < len(segs) and segs[pos] == handle:
            return int(tfs[pos])
        return 0

    def length(self, handle: int) -> int:
        self._check_handle(handle)
        return int(self.stats.lengths[handle])

    def term_vector(self, handle: int) -> Dict[str, int]:
        """Rebuild one segment's term counts from the postings (slow, for checks)."""
        self._check_handle(handle)
        out = {}
        for term in self.terms:
            tf = self.tf(term, handle)
            if tf:
                out[term] = tf
        return out


def build_index(
    segments: Sequence[Segment],
    config: AnalyzerConfig,
    segmentation: Optional[SegmentationParams] = None,
    candidate_pool: Optional[Iterable[str]] = None,
    query_cases: Iterable[str] = (),
) -> InvertedIndex:
    """Index ``segments`` in the given order; handle i is ``segments[i]``.

    ``query_cases`` names indexed base cases; ``candidate_pool`` defaults to
    every other case owning a segment.
    """
    if not segments:
        raise ValueError("empty index: no segments to index")
    lengths = np.zeros(len(segments), dtype=np.int32)
    acc: Dict[str, Tuple[List[int], List[int]]] = {}
    refs = []
    for h, seg in enumerate(segments):
        tokens = analyze(config, seg.text)
        lengths[h] = len(tokens)
        refs.append(SegmentRef(seg.document, seg.segment_index, seg.start, seg.end))
        for term, tf in Counter(tokens).items():
            entry = acc.get(term)
            if entry is None:
                entry = acc[term] = ([], [])
            entry[0].append(h)
            entry[1].append(tf)
    directory = SegmentDirectory(refs)
    terms = sorted(acc)
    offsets = np.zeros(len(terms) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(acc[t][0]) for t in terms])
    post_segments = np.fromiter(
        (h for t in terms for h in acc[t][0]), dtype=np.int32, count=int(offsets[-1])
    )
    post_tfs = np.fromiter(
        (f for t in terms for f in acc[t][1]), dtype=np.int32, count=int(offsets[-1])
    )
    return InvertedIndex(
        terms, offsets, post_segments, post_tfs, lengths, directory, config,
        segmentation, candidate_pool, query_cases,
    )


def _npy_bytes(arr: np.ndarray) -> bytes:
    buf = io.BytesIO()
    np.lib.format.write_array(buf, np.ascontiguousarray(arr), allow_pickle=False)
    return buf.getvalue()


def _tsv_field(value: str) -> str:
    if "\t" in value or "\n" in value or "\r" in value:
        raise ValueError(f"identifier {value!r} contains a tab or newline")
    return value


def serialize(index: InvertedIndex) -> Dict[str, bytes]:
    """All files of the on-disk layout, as bytes, keyed by file name."""
    dfs = np.diff(index.offsets)
    terms_tsv = "".join(f"{t}\t{int(d)}\n" for t, d in zip(index.terms, dfs))
    segments_tsv = "".join(
        f"{_tsv_field(r.case_id)}\t{r.segment_index}\t{r.start}\t{r.end}\n"
        for r in index.directory.refs
    )
    postings = np.stack([index.post_segments, index.post_tfs], axis=1).astype("<i4")
    files = {
        "terms.tsv": terms_tsv.encode("utf-8"),
        "postings.npy": _npy_bytes(postings),
        "lengths.npy": _npy_bytes(index.stats.lengths.astype("<i4")),
        "segments.tsv": segments_tsv.encode("utf-8"),
    }
    manifest = {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "analyzer": index.analyzer.to_dict(),
        "analyzer_fingerprint": index.analyzer.fingerprint(),
        "segmentation": index.segmentation.to_dict() if index.segmentation else None,
        "segment_count": index.stats.segment_count,
        "total_length": index.stats.total_length,
        "term_count": len(index.terms),
        "posting_count": int(index.offsets[-1]),
        "candidate_pool": sorted(index.candidate_pool),
        "query_cases": sorted(index.query_cases),
        "files": {
            name: {"bytes": len(data), "sha256": hashlib.sha256(data).hexdigest()}
            for name, data in files.items()
        },
    }
    files["manifest.json"] = (json.dumps(manifest, indent=1, sort_keys=True) + "\n").encode()
    return files


def persist(index: InvertedIndex, directory) -> Path:
    """Write the index to ``directory`` atomically, replacing an older index there."""
    directory = Path(directory)
    if directory.exists():
        if not directory.is_dir():
            raise IndexFormatError(f"{directory}: exists and is not a directory")
        if any(directory.iterdir()) and not (directory / "manifest.json").exists():
            raise IndexFormatError(f"{directory}: refusing to overwrite a non-index directory")
    directory.parent.mkdir(parents=True, exist_ok=True)
    files = serialize(index)
    tmp = Path(tempfile.mkdtemp(prefix=f".{directory.name}.", dir=directory.parent))
    try:
        for name, data in files.items():
            (tmp / name).write_bytes(data)
        if directory.exists():
            old = Path(tempfile.mkdtemp(prefix=f".{directory.name}.old.", dir=directory.parent))
            os.rmdir(old)
            os.rename(directory, old)
            os.rename(tmp, directory)
            shutil.rmtree(old)
        else:
            os.rename(tmp, directory)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return directory


def read_manifest(directory) -> dict:
    directory = Path(directory)
    path = directory / "manifest.json"
    if not path.is_file():
        raise IndexFormatError(f"{directory}: not an index (no manifest.json)")
    try:
        manifest = json.loads(path.read_text("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise IndexFormatError(f"{path}: unreadable manifest ({exc})") from exc
    if not isinstance(manifest, dict) or manifest.get("format") != FORMAT_NAME:
        raise IndexFormatError(f"{directory}: not an index (unknown format tag)")
    if manifest.get("format_version") != FORMAT_VERSION:
        raise IndexFormatError(
            f"{directory}: index format version {manifest.get('format_version')!r} "
            f"is not supported (expected {FORMAT_VERSION}); rebuild the index"
        )
    return manifest


def load(directory) -> InvertedIndex:
    directory = Path(directory)
    manifest = read_manifest(directory)
    blobs = {}
    for name in _FILES:
        meta = manifest["files"].get(name)
        path = directory / name
        if meta is None or not path.is_file():
            raise IndexFormatError(f"{path}: missing index file")
        data = path.read_bytes()
        if len(data) != meta["bytes"] or hashlib.sha256(data).hexdigest() != meta["sha256"]:
            raise IndexFormatError(f"{path}: truncated or corrupt (size/checksum mismatch)")
        blobs[name] = data

    terms, dfs = [], []
    for line in blobs["terms.tsv"].decode("utf-8").splitlines():
        term, df = line.split("\t")
        terms.append(term)
        dfs.append(int(df))
    offsets = np.zeros(len(terms) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum(dfs, dtype=np.int64)
    postings = np.lib.format.read_array(io.BytesIO(blobs["postings.npy"]), allow_pickle=False)
    lengths = np.lib.format.read_array(io.BytesIO(blobs["lengths.npy"]), allow_pickle=False)
    refs = []
    for line in blobs["segments.tsv"].decode("utf-8").splitlines():
        case_id, idx, start, end = line.split("\t")
        refs.append(SegmentRef(case_id, int(idx), int(start), int(end)))
    if (
        len(refs) != manifest["segment_count"]
        or len(lengths) != len(refs)
        or len(postings) != offsets[-1]
        or len(terms) != manifest["term_count"]
    ):
        raise IndexFormatError(f"{directory}: inconsistent index files")
    seg = manifest.get("segmentation")
    return InvertedIndex(
        terms,
        offsets,
        np.ascontiguousarray(postings[:, 0], dtype=np.int32),
        np.ascontiguousarray(postings[:, 1], dtype=np.int32),
        lengths.astype(np.int32),
        SegmentDirectory(refs),
        AnalyzerConfig(**manifest["analyzer"]),
        SegmentationParams(**seg) if seg else None,
        manifest["candidate_pool"],
        manifest.get("query_cases", ()),
    )
