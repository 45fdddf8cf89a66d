import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casebm25.corpus import (
    Document,
    SegmentationParams,
    SentenceList,
    dump_judgments,
    expected_segment_count,
    load_corpus,
    load_judgments,
    parse_judgments,
    segment,
    split_sentences,
)
from casebm25.errors import CorpusError, JudgmentsError


def sentences(n, doc="d"):
    return SentenceList(doc, tuple(f"S{i}." for i in range(n)))


class TestLoadCorpus:
    def test_two_files(self, tmp_path):
        (tmp_path / "002.txt").write_text("second", encoding="utf-8")
        (tmp_path / "001.txt").write_text("first", encoding="utf-8")
        docs = load_corpus(tmp_path)
        assert [d.case_id for d in docs] == ["001", "002"]
        assert docs[0].text == "first"

    def test_empty_directory(self, tmp_path):
        assert load_corpus(tmp_path) == []

    def test_case_folded_duplicate(self, tmp_path):
        (tmp_path / "001.txt").write_text("a", encoding="utf-8")
        (tmp_path / "001.TXT").write_text("b", encoding="utf-8")
        if len(list(tmp_path.iterdir())) == 1:
            pytest.skip("case-insensitive filesystem merged the two names")
        with pytest.raises(CorpusError, match="duplicate"):
            load_corpus(tmp_path)

    def test_unreadable_file_named(self, tmp_path):
        (tmp_path / "bad.txt").write_bytes(b"\xff\xfe\xfa")
        with pytest.raises(CorpusError, match="bad.txt"):
            load_corpus(tmp_path)

    def test_non_txt_ignored(self, tmp_path):
        (tmp_path / "a.txt").write_text("x", encoding="utf-8")
        (tmp_path / "notes.md").write_text("x", encoding="utf-8")
        assert [d.case_id for d in load_corpus(tmp_path)] == ["a"]

    def test_round_trip(self, tmp_path):
        docs = [Document("x1", "Alpha beta.\n\nGamma."), Document("x2", "")]
        for d in docs:
            (tmp_path / f"{d.case_id}.txt").write_text(d.text, encoding="utf-8")
        assert load_corpus(tmp_path) == docs


class TestJudgments:
    def test_parse(self, tmp_path):
        p = tmp_path / "j.json"
        p.write_text('{"q1": ["c1","c2"]}')
        j = load_judgments(p)
        assert j == {"q1": {"c1", "c2"}}

    def test_empty(self, tmp_path):
        p = tmp_path / "j.json"
        p.write_text("{}")
        assert load_judgments(p) == {}

    def test_malformed(self, tmp_path):
        p = tmp_path / "j.json"
        p.write_text('{"q1": [')
        with pytest.raises(JudgmentsError, match="malformed"):
            load_judgments(p)

    def test_self_reference(self):
        with pytest.raises(JudgmentsError, match="itself"):
            parse_judgments({"q1": ["c1", "q1"]})

    @pytest.mark.parametrize("raw", [[], {"q": "c"}, {"": ["c"]}, {"q": [""]}, {"q": [1]}])
    def test_shape_errors(self, raw):
        with pytest.raises(JudgmentsError):
            parse_judgments(raw)

    def test_round_trip(self, tmp_path):
        j = {"q2": {"b", "a"}, "q1": set()}
        p = tmp_path / "j.json"
        p.write_text(dump_judgments(j))
        assert load_judgments(p) == j
        assert json.loads(p.read_text()) == {"q1": [], "q2": ["a", "b"]}


class TestSplitSentences:
    def test_two_sentences(self):
        s = split_sentences(Document("d", "The court ruled. The appeal failed."))
        assert s.sentences == ("The court ruled.", "The appeal failed.")

    def test_empty(self):
        assert len(split_sentences(Document("d", ""))) == 0
        assert len(split_sentences(Document("d", "  \n\n ")) ) == 0

    def test_abbreviation_guard(self):
        # boundaries by hand: "v." is followed by a space but is listed; "cited." and
        # "governs." are ordinary periods (the latter at end of text).
        s = split_sentences(Document("d", "Smith v. Jones was cited. It governs."))
        assert s.sentences == ("Smith v. Jones was cited.", "It governs.")

    def test_no_boundary(self):
        assert split_sentences(Document("d", "no terminal punctuation here")).sentences == (
            "no terminal punctuation here",
        )

    def test_blank_line_boundary(self):
        s = split_sentences(Document("d", "Heading without period\n\nBody text. More"))
        assert s.sentences == ("Heading without period", "Body text.", "More")

    def test_question_and_exclamation(self):
        s = split_sentences(Document("d", "Is it? Yes! Done."))
        assert len(s) == 3

    def test_abbreviations_case_insensitive(self):
        s = split_sentences(Document("d", "See No. 12 and Acme Inc. today. Next."))
        assert s.sentences == ("See No. 12 and Acme Inc. today.", "Next.")

    def test_period_without_space_is_not_boundary(self):
        assert len(split_sentences(Document("d", "Pay 3.5 dollars. Ok."))) == 2

    @given(st.text(alphabet=st.sampled_from("ab .?!\n\tv"), max_size=80))
    def test_no_character_lost(self, text):
        s = split_sentences(Document("d", text))
        joined = "".join("".join(x.split()) for x in s.sentences)
        assert joined == "".join(text.split())
        assert all(x == x.strip() and x for x in s.sentences)

    def test_deterministic(self):
        text = "A b. C d? E f!\n\nG h."
        assert split_sentences(Document("d", text)) == split_sentences(Document("d", text))


class TestSegment:
    def test_exact_fit(self):
        segs = segment(sentences(10), SegmentationParams(10, 5))
        assert [(s.start, s.end) for s in segs] == [(0, 10)]

    def test_short_document(self):
        segs = segment(sentences(3), SegmentationParams(10, 5))
        assert [(s.start, s.end) for s in segs] == [(0, 3)]

    def test_n23(self):
        # starts 0, 5, 10, 15; the window at 15 ends at 23 = n, so generation stops
        segs = segment(sentences(23), SegmentationParams(10, 5))
        assert [s.sentence_range for s in segs] == [(0, 10), (5, 15), (10, 20), (15, 23)]
        assert [s.segment_index for s in segs] == [0, 1, 2, 3]

    def test_empty(self):
        assert segment(sentences(0), SegmentationParams()) == []

    def test_text_joins_sentences(self):
        segs = segment(sentences(3), SegmentationParams(2, 1))
        assert [s.text for s in segs] == ["S0. S1.", "S1. S2."]

    def test_query_truncation(self):
        p = SegmentationParams(10, 5, max_query_segments=2)
        assert len(segment(sentences(40), p)) == 7
        assert len(segment(sentences(40), p, query=True)) == 2
        assert len(segment(sentences(8), p, query=True)) == 1

    @pytest.mark.parametrize(
        "kwargs", [dict(window_size=0), dict(stride=0), dict(window_size=5, stride=6),
                   dict(max_query_segments=0)]
    )
    def test_invalid_params(self, kwargs):
        with pytest.raises(ValueError):
            SegmentationParams(**kwargs)

    @settings(max_examples=200)
    @given(st.integers(0, 100), st.integers(1, 20), st.data())
    def test_properties(self, n, window, data):
        stride = data.draw(st.integers(1, window))
        segs = segment(sentences(n), SegmentationParams(window, stride))
        assert len(segs) == expected_segment_count(n, window, stride)
        covered = set()
        for s in segs:
            assert 0 <= s.start < s.end <= n
            assert s.end - s.start <= window
            covered.update(range(s.start, s.end))
        assert covered == set(range(n))
        for a, b in zip(segs, segs[1:]):
            assert b.start - a.start == stride
            assert not (a.start <= b.start and b.end <= a.end)
