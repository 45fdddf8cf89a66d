"""Case documents, relevance labels, sentence splitting and sentence windows."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Set

from .errors import CorpusError, JudgmentsError

# Tokens (lowercased, trailing period included) that never end a sentence.
ABBREVIATIONS = frozenset(
    """
    v. vs. no. nos. mr. mrs. ms. dr. prof. hon. sr. jr. st. inc. ltd. co. corp.
    j. jj. j.a. c.j. c.j.c. e.g. i.e. cf. al. para. paras. s. ss. art. arts.
    p. pp. fig. supp. ch. sch. reg. regs. f.c. f.c.a. s.c.r. s.c.c. u.s. u.k.
    dept. gov. govt. vol. ed. eds. rev. stat. approx. ca. cir.
    """.split()
)

_BLOCK_BREAK = re.compile(r"\n[ \t\r\f\v]*\n")
_CANDIDATE_END = re.compile(r"[.?!](?=\s)")


@dataclass(frozen=True)
class Document:
    case_id: str
    text: str


@dataclass(frozen=True)
class SentenceList:
    document: str
    sentences: tuple

    def __len__(self) -> int:
        return len(self.sentences)


@dataclass(frozen=True)
class Segment:
    document: str
    segment_index: int
    start: int
    end: int
    text: str

    @property
    def sentence_range(self) -> tuple:
        return (self.start, self.end)


@dataclass(frozen=True)
class SegmentationParams:
    window_size: int = 10
    stride: int = 5
    max_query_segments: Optional[int] = None

    def __post_init__(self):
        if self.window_size < 1:
            raise ValueError(f"window_size must be >= 1, got {self.window_size}")
        if not 1 <= self.stride <= self.window_size:
            raise ValueError(
                f"stride must be in [1, window_size={self.window_size}], got {self.stride}"
            )
        if self.max_query_segments is not None and self.max_query_segments < 1:
            raise ValueError(
                f"max_query_segments must be >= 1 when set, got {self.max_query_segments}"
            )

    def to_dict(self) -> dict:
        return {
            "window_size": self.window_size,
            "stride": self.stride,
            "max_query_segments": self.max_query_segments,
        }


Judgments = Dict[str, Set[str]]


def load_corpus(directory) -> List[Document]:
    """Read every ``<case_id>.txt`` file in ``directory``, sorted by case id."""
    directory = Path(directory)
    if not directory.is_dir():
        raise CorpusError(f"{directory}: not a directory")
    docs: Dict[str, Document] = {}
    for path in sorted(directory.iterdir()):
        if path.suffix.lower() != ".txt" or not path.is_file():
            continue
        case_id = path.stem
        if not case_id:
            raise CorpusError(f"{path}: empty case id")
        if case_id in docs:
            raise CorpusError(f"{path}: duplicate case id {case_id!r}")
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise CorpusError(f"{path}: cannot read case file ({exc})") from exc
        docs[case_id] = Document(case_id, text)
    return [docs[k] for k in sorted(docs)]


def load_judgments(path) -> Judgments:
    """Parse a JSON object mapping base case ids to lists of relevant case ids."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as exc:
        raise JudgmentsError(f"{path}: cannot read judgments ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise JudgmentsError(f"{path}: malformed JSON ({exc})") from exc
    return parse_judgments(raw, source=str(path))


def parse_judgments(raw, source: str = "<judgments>") -> Judgments:
    if not isinstance(raw, dict):
        raise JudgmentsError(f"{source}: expected a JSON object at top level")
    out: Judgments = {}
    for base, cands in raw.items():
        if not isinstance(base, str) or not base:
            raise JudgmentsError(f"{source}: empty base case id")
        if not isinstance(cands, list) or not all(isinstance(c, str) for c in cands):
            raise JudgmentsError(f"{source}: {base!r} must map to a list of strings")
        if any(not c for c in cands):
            raise JudgmentsError(f"{source}: {base!r} lists an empty candidate id")
        if base in cands:
            raise JudgmentsError(f"{source}: {base!r} lists itself as a relevant case")
        out[base] = set(cands)
    return out


def dump_judgments(judgments: Judgments) -> str:
    return json.dumps({k: sorted(v) for k, v in sorted(judgments.items())}, indent=1) + "\n"


def _is_abbreviation(text: str, dot: int) -> bool:
    start = dot
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    word = text[start : dot + 1].lower().lstrip("(\"'[")
    return word in ABBREVIATIONS


def split_sentences(doc: Document) -> SentenceList:
    """Rule-based splitter: breaks after ``.?!`` + whitespace and at blank lines.

    A period closing a known abbreviation ("v.", "No.", "Inc.") is not a break.
    """
    sentences = []
    for block in _BLOCK_BREAK.split(doc.text):
        begin = 0
        for m in _CANDIDATE_END.finditer(block):
            end = m.end()
            if block[m.start()] == "." and _is_abbreviation(block, m.start()):
                continue
            piece = block[begin:end].strip()
            if piece:
                sentences.append(piece)
            begin = end
        piece = block[begin:].strip()
        if piece:
            sentences.append(piece)
    return SentenceList(doc.case_id, tuple(sentences))


def window_starts(n: int, window_size: int, stride: int) -> List[int]:
    """Start offsets of the sentence windows covering ``n`` sentences."""
    if n <= 0:
        return []
    starts = [0]
    while starts[-1] + window_size < n:
        starts.append(starts[-1] + stride)
    return starts


def expected_segment_count(n: int, window_size: int, stride: int) -> int:
    if n <= 0:
        return 0
    if n <= window_size:
        return 1
    return 1 + math.ceil((n - window_size) / stride)


def segment(
    sentences: SentenceList, params: SegmentationParams, query: bool = False
) -> List[Segment]:
    """Overlapping sentence windows of a document.

    ``max_query_segments`` truncates the result only when ``query`` is set;
    candidate cases are always segmented in full.
    """
    n = len(sentences.sentences)
    out = []
    for i, start in enumerate(window_starts(n, params.window_size, params.stride)):
        end = min(start + params.window_size, n)
        text = " ".join(sentences.sentences[start:end])
        out.append(Segment(sentences.document, i, start, end, text))
    if query and params.max_query_segments is not None:
        out = out[: params.max_query_segments]
    return out


def segment_document(
    doc: Document, params: SegmentationParams, query: bool = False
) -> List[Segment]:
    return segment(split_sentences(doc), params, query=query)
