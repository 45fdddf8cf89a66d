import json
import subprocess
import sys

import pytest

from casebm25.aggregate import read_run
from casebm25.cli import main
from casebm25.evaluate import read_answers

from e2e import FIXTURE, mismatches, run_pipeline
from synthetic import make_task, write_docs


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    return run_pipeline(tmp_path_factory.mktemp("e2e"))


def test_fixture_reproduced(pipeline):
    assert mismatches(pipeline) == []


def test_fixture_reproduced_threaded(tmp_path):
    assert mismatches(run_pipeline(tmp_path, threads=8)) == []


def test_label_density():
    judgments = json.loads((FIXTURE / "judgments.json").read_text())
    assert len(judgments) == 10
    assert sum(map(len, judgments.values())) / len(judgments) == pytest.approx(5, abs=1)
    assert len(list((FIXTURE / "corpus").glob("*.txt"))) == 60


@pytest.fixture
def task(tmp_path):
    cands, queries, judgments = make_task(n_candidates=24, n_queries=4, topics=6, seed=3)
    write_docs(tmp_path / "corpus", cands)
    write_docs(tmp_path / "queries", queries)
    (tmp_path / "judgments.json").write_text(json.dumps(judgments))
    return tmp_path


def args(task, *extra):
    return ["--corpus", str(task / "corpus"), "--queries", str(task / "queries"),
            "--judgments", str(task / "judgments.json"), "--index", str(task / "ix"), *extra]


def test_select_top_five_equals_run_prefix(task):
    assert main(["index", *args(task)]) == 0
    assert main(["retrieve", *args(task, "--run", str(task / "run.tsv"))]) == 0
    assert main(["select", *args(task, "--run", str(task / "run.tsv"), "--answers",
                                 str(task / "a.tsv"), "--alpha", "0", "--beta", "5",
                                 "--gamma", "0")]) == 0
    run = read_run(task / "run.tsv")
    answers = read_answers(task / "a.tsv")
    assert answers == {q: set(rl.candidates[:5]) for q, rl in run.items()}


def test_analyzer_mismatch_refused(task, capsys):
    assert main(["index", *args(task)]) == 0
    code = main(["retrieve", *args(task, "--run", str(task / "run.tsv"), "--no-stem")])
    assert code == 2
    assert "analyzer" in capsys.readouterr().err
    assert not (task / "run.tsv").exists()


def test_window_mismatch_refused(task):
    assert main(["index", *args(task)]) == 0
    assert main(["retrieve", *args(task, "--run", str(task / "r.tsv"), "--window", "8")]) == 2


def test_empty_query_document(task):
    (task / "queries" / "q9999.txt").write_text("")
    assert main(["index", *args(task)]) == 0
    assert main(["retrieve", *args(task, "--run", str(task / "run.tsv"))]) == 0
    assert "q9999" not in read_run(task / "run.tsv")


def test_rebuild_is_deterministic(task):
    assert main(["index", *args(task)]) == 0
    first = {p.name: p.read_bytes() for p in (task / "ix").iterdir()}
    assert main(["index", *args(task)]) == 0
    assert first == {p.name: p.read_bytes() for p in (task / "ix").iterdir()}


def test_threads_byte_identical(task):
    assert main(["index", *args(task)]) == 0
    for t in (1, 8):
        assert main(["retrieve", *args(task, "--run", str(task / f"r{t}.tsv"),
                                       "--threads", str(t))]) == 0
    assert (task / "r1.tsv").read_bytes() == (task / "r8.tsv").read_bytes()


def test_tuning_prefix_flag(task):
    main(["index", *args(task)])
    main(["retrieve", *args(task, "--run", str(task / "run.tsv"))])
    for prefix in ("1", "all"):
        out = task / f"p{prefix}.json"
        assert main(["tune", *args(task, "--run", str(task / "run.tsv"), "--policy", str(out),
                                   "--tuning-prefix", prefix)]) == 0
    a = json.loads((task / "p1.json").read_text())
    b = json.loads((task / "pall.json").read_text())
    assert a["grid_hash"] != b["grid_hash"]


def test_evaluate_prints_table(task, capsys):
    (task / "a.tsv").write_text("")
    assert main(["evaluate", *args(task, "--answers", str(task / "a.tsv"))]) == 0
    out = capsys.readouterr().out
    assert "precision" in out and "f1" in out


def test_stats(task, capsys):
    assert main(["stats", *args(task)]) == 0
    assert "Number of candidate cases          24" in capsys.readouterr().out


class TestErrors:
    def test_missing_required_option(self, capsys):
        assert main(["retrieve"]) == 1
        assert "--queries" in capsys.readouterr().err

    def test_unknown_flag(self):
        with pytest.raises(SystemExit) as exc:
            main(["index", "--bogus"])
        assert exc.value.code == 1

    def test_bad_parameter_value(self, task):
        assert main(["index", *args(task, "--stride", "50")]) == 1

    def test_missing_corpus(self, tmp_path):
        code = main(["index", "--corpus", str(tmp_path / "nope"), "--index", str(tmp_path / "i")])
        assert code == 2

    def test_corrupt_index(self, task):
        (task / "ix").mkdir()
        (task / "ix" / "manifest.json").write_text("{")
        assert main(["retrieve", *args(task, "--run", str(task / "r.tsv"))]) == 2

    def test_malformed_run(self, task, capsys):
        (task / "run.tsv").write_text("q\ta\t1\n")
        code = main(["select", *args(task, "--run", str(task / "run.tsv"),
                                     "--answers", str(task / "a.tsv"))])
        assert code == 2
        assert ":1:" in capsys.readouterr().err
        assert not (task / "a.tsv").exists()

    def test_unknown_config_key(self, tmp_path):
        (tmp_path / "c.json").write_text('{"colour": 1}')
        assert main(["stats", "--config", str(tmp_path / "c.json")]) == 1

    def test_answers_without_judgments(self, task):
        (task / "a.tsv").write_text("q-unjudged\t000001\n")
        assert main(["evaluate", *args(task, "--answers", str(task / "a.tsv"))]) == 2


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "casebm25.cli", "--help"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("index", "retrieve", "tune", "select", "evaluate", "stats"):
        assert cmd in res.stdout
