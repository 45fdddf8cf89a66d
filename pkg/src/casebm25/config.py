"""Run configuration: one JSON document that fixes every pipeline setting."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from .analysis import AnalyzerConfig
from .bm25 import Bm25Params
from .corpus import SegmentationParams
from .selection import GridSpec, SelectionPolicy

PATH_KEYS = (
    "corpus_dir",
    "queries_dir",
    "judgments_path",
    "index_dir",
    "run_path",
    "policy_path",
    "answers_path",
    "report_path",
)


@dataclass
class RunConfig:
    corpus_dir: Optional[str] = None
    queries_dir: Optional[str] = None
    judgments_path: Optional[str] = None
    index_dir: Optional[str] = None
    run_path: Optional[str] = None
    policy_path: Optional[str] = None
    answers_path: Optional[str] = None
    report_path: Optional[str] = None
    segmentation: SegmentationParams = field(default_factory=SegmentationParams)
    analyzer: AnalyzerConfig = field(default_factory=AnalyzerConfig)
    bm25: Bm25Params = field(default_factory=Bm25Params)
    k_segments: Optional[int] = 1000
    policy: SelectionPolicy = field(default_factory=SelectionPolicy)
    grid: GridSpec = field(default_factory=GridSpec)
    threads: int = 1

    def __post_init__(self):
        if self.k_segments is not None and self.k_segments < 1:
            raise ValueError(f"k_segments must be >= 1 or null, got {self.k_segments}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in PATH_KEYS}
        d.update(
            segmentation=self.segmentation.to_dict(),
            analyzer=self.analyzer.to_dict(),
            bm25={"k1": self.bm25.k1, "b": self.bm25.b},
            k_segments=self.k_segments,
            policy={"alpha": self.policy.alpha, "beta": self.policy.beta, "gamma": self.policy.gamma},
            grid=self.grid.to_dict(),
            threads=self.threads,
        )
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kw = {k: d[k] for k in PATH_KEYS if k in d}
        if "segmentation" in d:
            kw["segmentation"] = SegmentationParams(**d["segmentation"])
        if "analyzer" in d:
            kw["analyzer"] = AnalyzerConfig(**d["analyzer"])
        if "bm25" in d:
            kw["bm25"] = Bm25Params(**d["bm25"])
        if "policy" in d:
            kw["policy"] = SelectionPolicy(**d["policy"])
        if "grid" in d:
            kw["grid"] = GridSpec.from_dict(d["grid"])
        for k in ("k_segments", "threads"):
            if k in d:
                kw[k] = d[k]
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "RunConfig":
        d = json.loads(Path(path).read_text("utf-8"))
        if not isinstance(d, dict):
            raise ValueError(f"{path}: config must be a JSON object")
        base = Path(path).parent
        for k in PATH_KEYS:
            if d.get(k) is not None:
                d[k] = str(base / d[k])
        return cls.from_dict(d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"
