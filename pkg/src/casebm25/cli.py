"""Command line: index, retrieve, tune, select, evaluate, stats.

Exit status 0 on success, 1 on usage/configuration errors, 2 on data errors.
Settings come from ``--config`` (JSON mirroring RunConfig) with flags on top.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .aggregate import read_run, write_run
from .config import RunConfig
from .corpus import load_corpus, load_judgments
from .errors import DataError
from .evaluate import corpus_stats, format_answers, micro_eval, read_answers
from .index import load as load_index
from .index import persist
from .io import atomic_write_text
from .pipeline import check_compatible, index_cases, retrieve_all
from .selection import SelectionPolicy, grid_search, policy_from_json, select_ranked

UNBOUNDED = ("all", "inf", "none")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _count_or_all(text: str):
    if text.lower() in UNBOUNDED:
        return "all"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer or 'all', got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer or 'all', got {text!r}")
    return value


def _options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    g = p.add_argument_group("inputs and outputs")
    g.add_argument("--config", help="JSON run configuration")
    g.add_argument("--corpus", dest="corpus_dir", default=S, help="directory of candidate <case_id>.txt files")
    g.add_argument("--queries", dest="queries_dir", default=S, help="directory of base case <case_id>.txt files")
    g.add_argument("--judgments", dest="judgments_path", default=S, help="JSON relevance labels")
    g.add_argument("--index", dest="index_dir", default=S, help="index directory")
    g.add_argument("--run", dest="run_path", default=S, help="run file")
    g.add_argument("--policy", dest="policy_path", default=S, help="tuned policy JSON")
    g.add_argument("--answers", dest="answers_path", default=S, help="answers file")
    g.add_argument("--report", "--output", dest="report_path", default=S, help="report output file")
    g = p.add_argument_group("segmentation and analysis")
    g.add_argument("--window", type=int, default=S, help="sentences per segment (10)")
    g.add_argument("--stride", type=int, default=S, help="sentences between segment starts (5)")
    g.add_argument("--max-query-segments", type=_count_or_all, default=S,
                   help="use only the first N segments of each base case ('all')")
    g.add_argument("--no-stem", action="store_true", default=S)
    g.add_argument("--no-lowercase", action="store_true", default=S)
    g.add_argument("--stopwords", choices=("english", "none"), default=S)
    g = p.add_argument_group("scoring")
    g.add_argument("--k1", type=float, default=S, help="BM25 k1 (0.9)")
    g.add_argument("--b", type=float, default=S, help="BM25 b (0.4)")
    g.add_argument("--k-segments", type=_count_or_all, default=S,
                   help="hits kept per base segment, or 'all' (1000)")
    g = p.add_argument_group("answer selection")
    g.add_argument("--alpha", type=float, default=S)
    g.add_argument("--beta", type=int, default=S)
    g.add_argument("--gamma", type=float, default=S)
    g.add_argument("--grid", default=S, help="JSON grid {alphas, betas, gammas, tuning_prefix}")
    g.add_argument("--tuning-prefix", type=_count_or_all, default=S,
                   help="tune on the first N judged queries in id order (100)")
    g.add_argument("--threads", type=int, default=S)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _options()
    parser = _Parser(prog="casebm25", description="Segment-level BM25 retrieval for long cases.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "index": "segment and index candidate (and base) cases",
        "retrieve": "rank candidate cases for every base case into a run file",
        "tune": "grid-search the selection policy against judgments",
        "select": "apply a selection policy to a run file",
        "evaluate": "micro precision/recall/F1 of an answers file",
        "stats": "dataset statistics table",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    d = cfg.to_dict()
    a = vars(args)
    for key in ("corpus_dir", "queries_dir", "judgments_path", "index_dir", "run_path",
                "policy_path", "answers_path", "report_path"):
        if key in a:
            d[key] = a[key]
    seg = d["segmentation"]
    if "window" in a:
        seg["window_size"] = a["window"]
    if "stride" in a:
        seg["stride"] = a["stride"]
    if "max_query_segments" in a:
        seg["max_query_segments"] = None if a["max_query_segments"] == "all" else a["max_query_segments"]
    if a.get("no_stem"):
        d["analyzer"]["stem"] = False
    if a.get("no_lowercase"):
        d["analyzer"]["lowercase"] = False
    if "stopwords" in a:
        d["analyzer"]["stopwords"] = a["stopwords"]
    for key in ("k1", "b"):
        if key in a:
            d["bm25"][key] = a[key]
    if "k_segments" in a:
        d["k_segments"] = None if a["k_segments"] == "all" else a["k_segments"]
    for key in ("alpha", "beta", "gamma"):
        if key in a:
            d["policy"][key] = a[key]
    if "grid" in a:
        try:
            grid = json.loads(Path(a["grid"]).read_text("utf-8"))
        except OSError as exc:
            raise UsageError(f"cannot read grid file: {exc}")
        d["grid"] = dict(d["grid"], **grid)
    if "tuning_prefix" in a:
        d["grid"]["tuning_prefix"] = None if a["tuning_prefix"] == "all" else a["tuning_prefix"]
    if "threads" in a:
        d["threads"] = a["threads"]
    return RunConfig.from_dict(d)


def _need(cfg: RunConfig, *keys: str) -> None:
    flags = {
        "corpus_dir": "--corpus", "queries_dir": "--queries", "judgments_path": "--judgments",
        "index_dir": "--index", "run_path": "--run", "policy_path": "--policy",
        "answers_path": "--answers",
    }
    missing = [flags[k] for k in keys if getattr(cfg, k) is None]
    if missing:
        raise UsageError(f"missing required option(s): {', '.join(missing)}")


def cmd_index(cfg: RunConfig, args) -> None:
    _need(cfg, "corpus_dir", "index_dir")
    candidates = load_corpus(cfg.corpus_dir)
    queries = load_corpus(cfg.queries_dir) if cfg.queries_dir else []
    index = index_cases(candidates, queries, cfg.segmentation, cfg.analyzer)
    persist(index, cfg.index_dir)
    print(
        f"indexed {index.segment_count} segments from {len(candidates)} candidate and "
        f"{len(queries)} base cases ({len(index.terms)} terms) -> {cfg.index_dir}"
    )


def cmd_retrieve(cfg: RunConfig, args) -> None:
    _need(cfg, "queries_dir", "index_dir", "run_path")
    index = load_index(cfg.index_dir)
    check_compatible(index, cfg.segmentation, cfg.analyzer)
    queries = load_corpus(cfg.queries_dir)
    ranked = retrieve_all(queries, index, cfg.segmentation, cfg.bm25, cfg.k_segments, cfg.threads)
    write_run(ranked, cfg.run_path)
    print(f"retrieved {len(ranked)} base cases -> {cfg.run_path}")


def cmd_tune(cfg: RunConfig, args) -> None:
    _need(cfg, "run_path", "judgments_path", "policy_path")
    ranked = read_run(cfg.run_path)
    judgments = load_judgments(cfg.judgments_path)
    result = grid_search(ranked, judgments, cfg.grid, threads=cfg.threads)
    atomic_write_text(cfg.policy_path, result.to_json())
    p = result.policy
    print(f"best alpha={p.alpha} beta={p.beta} gamma={p.gamma} f1={result.f1:.4f} "
          f"({cfg.grid.size} triples) -> {cfg.policy_path}")


def _policy(cfg: RunConfig, args) -> SelectionPolicy:
    """Policy file when one is configured, with --alpha/--beta/--gamma on top."""
    if cfg.policy_path is None:
        return cfg.policy
    try:
        policy = policy_from_json(Path(cfg.policy_path).read_text("utf-8"))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise DataError(f"{cfg.policy_path}: unreadable policy ({exc})") from exc
    overrides = {k: getattr(args, k) for k in ("alpha", "beta", "gamma") if hasattr(args, k)}
    return replace(policy, **overrides) if overrides else policy


def cmd_select(cfg: RunConfig, args) -> None:
    _need(cfg, "run_path", "answers_path")
    policy = _policy(cfg, args)
    ranked = read_run(cfg.run_path)
    answers = {q: select_ranked(rl, policy) for q, rl in ranked.items()}
    atomic_write_text(cfg.answers_path, format_answers(answers))
    total = sum(len(v) for v in answers.values())
    print(f"selected {total} answers for {len(answers)} base cases "
          f"(alpha={policy.alpha} beta={policy.beta} gamma={policy.gamma}) -> {cfg.answers_path}")


def cmd_evaluate(cfg: RunConfig, args) -> None:
    _need(cfg, "answers_path", "judgments_path")
    report = micro_eval(read_answers(cfg.answers_path), load_judgments(cfg.judgments_path))
    if cfg.report_path:
        atomic_write_text(cfg.report_path, report.to_json())
    sys.stdout.write(report.to_text())


def cmd_stats(cfg: RunConfig, args) -> None:
    _need(cfg, "corpus_dir", "judgments_path")
    stats = corpus_stats(load_corpus(cfg.corpus_dir), load_judgments(cfg.judgments_path))
    if cfg.report_path:
        atomic_write_text(cfg.report_path, stats.to_text())
    sys.stdout.write(stats.to_text())


COMMANDS = {
    "index": cmd_index,
    "retrieve": cmd_retrieve,
    "tune": cmd_tune,
    "select": cmd_select,
    "evaluate": cmd_evaluate,
    "stats": cmd_stats,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (UsageError, ValueError, TypeError, OSError) as exc:
        print(f"casebm25 {args.command}: error: {exc}", file=sys.stderr)
        return 1
    try:
        COMMANDS[args.command](cfg, args)
    except UsageError as exc:
        print(f"casebm25 {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"casebm25 {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
