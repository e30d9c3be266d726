from __future__ import annotations

import random

import pytest

from scisearch.evaluation import (
    EvalFormatError,
    Qrels,
    RunEntry,
    RunFile,
    parse_qrels,
    parse_run,
    write_qrels,
    write_run,
)


class TestParseQrels:
    def test_basic(self, tmp_path):
        path = tmp_path / "qrels.txt"
        path.write_text("1 0 doc1 2\n1 0 doc2 0\n3 0 doc1 1\n")
        qrels = parse_qrels(path)
        assert qrels.judgements == {(1, "doc1"): 2, (1, "doc2"): 0, (3, "doc1"): 1}
        assert qrels.topics() == [1, 3]
        assert qrels.for_topic(1) == {"doc1": 2, "doc2": 0}

    def test_iteration_field_ignored(self, tmp_path):
        path = tmp_path / "qrels.txt"
        path.write_text("1 0 doc1 1\n2 Q7 doc2 1\n3 anything doc3 1\n")
        qrels = parse_qrels(path)
        assert len(qrels.judgements) == 3

    def test_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "qrels.txt"
        path.write_text("\n1 0 doc1 1\n\n\n2 0 doc2 2\n")
        assert len(parse_qrels(path).judgements) == 2

    @pytest.mark.parametrize(
        "line, lineno",
        [
            ("1 0 doc1", 1),
            ("1 0 doc1 1 extra", 1),
            ("one 0 doc1 1", 1),
            ("1 0 doc1 high", 1),
            ("1 0 doc1 3", 1),
            ("1 0 doc1 -1", 1),
        ],
    )
    def test_corrupt_line_names_location(self, tmp_path, line, lineno):
        path = tmp_path / "qrels.txt"
        path.write_text(line + "\n")
        with pytest.raises(EvalFormatError) as excinfo:
            parse_qrels(path)
        assert f"{path}:{lineno}" in str(excinfo.value)

    def test_duplicate_judgement_names_second_line(self, tmp_path):
        path = tmp_path / "qrels.txt"
        path.write_text("1 0 doc1 1\n1 0 doc1 2\n")
        with pytest.raises(EvalFormatError) as excinfo:
            parse_qrels(path)
        assert f"{path}:2" in str(excinfo.value)

    def test_round_trip(self, tmp_path):
        qrels = Qrels({(2, "b"): 1, (1, "a"): 2, (1, "z"): 0})
        path = tmp_path / "qrels.txt"
        write_qrels(qrels, path)
        assert parse_qrels(path).judgements == qrels.judgements

    def test_written_sorted_with_zero_iteration(self, tmp_path):
        qrels = Qrels({(2, "b"): 1, (1, "z"): 0, (1, "a"): 2})
        path = tmp_path / "qrels.txt"
        write_qrels(qrels, path)
        assert path.read_text() == "1 0 a 2\n1 0 z 0\n2 0 b 1\n"


class TestParseRun:
    def test_basic(self, tmp_path):
        path = tmp_path / "run.txt"
        path.write_text(
            "1 Q0 docA 1 0.9 tag\n1 Q0 docB 2 0.5 tag\n2 Q0 docC 1 1.5 tag\n"
        )
        run = parse_run(path)
        assert run.doc_ids(1) == ["docA", "docB"]
        assert run.topics[1][0] == RunEntry("docA", 1, 0.9, "tag")
        assert run.doc_ids(2) == ["docC"]

    def test_q0_field_not_interpreted(self, tmp_path):
        path = tmp_path / "run.txt"
        path.write_text("1 XX docA 1 0.9 tag\n")
        assert parse_run(path).doc_ids(1) == ["docA"]

    def test_equal_scores_allowed(self, tmp_path):
        path = tmp_path / "run.txt"
        path.write_text("1 Q0 a 1 0.5 t\n1 Q0 b 2 0.5 t\n")
        assert parse_run(path).doc_ids(1) == ["a", "b"]

    @pytest.mark.parametrize(
        "content, lineno",
        [
            ("1 Q0 docA 1 0.9\n", 1),
            ("1 Q0 docA 1 0.9 tag extra\n", 1),
            ("x Q0 docA 1 0.9 tag\n", 1),
            ("1 Q0 docA one 0.9 tag\n", 1),
            ("1 Q0 docA 1 abc tag\n", 1),
            ("1 Q0 docA 2 0.9 tag\n", 1),
            ("1 Q0 docA 1 0.9 tag\n1 Q0 docB 3 0.8 tag\n", 2),
            ("1 Q0 docA 1 0.9 tag\n1 Q0 docA 2 0.8 tag\n", 2),
            ("1 Q0 docA 1 0.5 tag\n1 Q0 docB 2 0.9 tag\n", 2),
            ("2 Q0 docA 1 0.9 tag\n1 Q0 docB 1 0.9 tag\n", 2),
            ("1 Q0 docA 1 0.9 tag\n2 Q0 docB 1 0.9 tag\n1 Q0 docC 1 0.8 tag\n", 3),
        ],
    )
    def test_corrupt_run_names_location(self, tmp_path, content, lineno):
        path = tmp_path / "run.txt"
        path.write_text(content)
        with pytest.raises(EvalFormatError) as excinfo:
            parse_run(path)
        assert f"{path}:{lineno}" in str(excinfo.value)

    def test_topic_cap_enforced(self, tmp_path):
        path = tmp_path / "run.txt"
        lines = [f"1 Q0 doc{i:04d} {i + 1} {float(2000 - i)!r} t" for i in range(1001)]
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(EvalFormatError) as excinfo:
            parse_run(path)
        assert "1000" in str(excinfo.value)
        assert f"{path}:1001" in str(excinfo.value)

    def test_exactly_one_thousand_accepted(self, tmp_path):
        path = tmp_path / "run.txt"
        lines = [f"1 Q0 doc{i:04d} {i + 1} {float(2000 - i)!r} t" for i in range(1000)]
        path.write_text("\n".join(lines) + "\n")
        assert len(parse_run(path).topics[1]) == 1000


class TestWriteRun:
    def test_round_trip_preserves_scores_exactly(self, tmp_path):
        """repr-format scores survive write/parse, including non-terminating floats."""
        scores = [1.0, 2.0 / 61.0, 1.0 / 3.0, 0.1 + 0.2, 1e-17]
        scores.sort(reverse=True)
        run = RunFile.from_ranked(
            {1: [(f"d{i}", s) for i, s in enumerate(scores)]}, "tag"
        )
        path = tmp_path / "run.txt"
        write_run(run, path)
        parsed = parse_run(path)
        assert [e.score for e in parsed.topics[1]] == scores
        assert parsed.topics == run.topics

    def test_rewrite_is_byte_identical(self, tmp_path):
        rng = random.Random(55)
        per_topic = {}
        for topic in range(1, 36):
            n = rng.randint(1, 20)
            scores = sorted((rng.random() for _ in range(n)), reverse=True)
            per_topic[topic] = [(f"doc{i:03d}", s) for i, s in enumerate(scores)]
        run = RunFile.from_ranked(per_topic, "mytag")
        first = tmp_path / "a.txt"
        second = tmp_path / "b.txt"
        write_run(run, first)
        write_run(parse_run(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_topics_written_ascending(self, tmp_path):
        run = RunFile.from_ranked({5: [("a", 1.0)], 2: [("b", 1.0)]}, "t")
        path = tmp_path / "run.txt"
        write_run(run, path)
        topics = [int(line.split()[0]) for line in path.read_text().splitlines()]
        assert topics == sorted(topics)

    def test_tag_override(self, tmp_path):
        run = RunFile.from_ranked({1: [("a", 1.0)]}, "orig")
        path = tmp_path / "run.txt"
        write_run(run, path, tag="override")
        assert path.read_text().split()[-1] == "override"

    def test_write_validates(self, tmp_path):
        run = RunFile({1: [RunEntry("a", 1, 0.1, "t"), RunEntry("b", 2, 0.9, "t")]})
        with pytest.raises(EvalFormatError):
            write_run(run, tmp_path / "run.txt")


class TestRunFileValidate:
    def test_from_ranked_valid(self):
        run = RunFile.from_ranked({1: [("a", 0.9), ("b", 0.5)]}, "t")
        assert run.doc_ids(1) == ["a", "b"]
        assert run.topics[1][1].rank == 2

    def test_cap(self):
        entries = [(f"d{i}", float(-i)) for i in range(1001)]
        with pytest.raises(EvalFormatError):
            RunFile.from_ranked({1: entries}, "t")

    def test_duplicate_doc(self):
        with pytest.raises(EvalFormatError):
            RunFile.from_ranked({1: [("a", 0.9), ("a", 0.5)]}, "t")

    def test_increasing_scores(self):
        with pytest.raises(EvalFormatError):
            RunFile.from_ranked({1: [("a", 0.1), ("b", 0.9)]}, "t")

    def test_broken_rank_sequence(self):
        run = RunFile({1: [RunEntry("a", 2, 0.9, "t")]})
        with pytest.raises(EvalFormatError):
            run.validate()
