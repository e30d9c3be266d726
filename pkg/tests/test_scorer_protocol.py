from __future__ import annotations

import concurrent.futures
import sys
from pathlib import Path

import pytest

from scisearch.pipeline import run_search
from scisearch.rank import SubprocessScorer

FAKE_SCORER = str(Path(__file__).parent / "fake_scorer.py")


@pytest.fixture
def scorer():
    with SubprocessScorer([sys.executable, FAKE_SCORER]) as scorer:
        yield scorer


class TestSubprocessScorer:
    def test_extract_answers_round_trip(self, scorer):
        spans = scorer.extract_answers("my query", ["para one.", "para two."])
        assert spans == ["answer 0 for my query", "answer 1 for my query"]

    def test_summarize_round_trip(self, scorer):
        summary = scorer.summarize("my query", ["a.", "b.", "c."])
        assert summary == "summary of 3 paragraphs about my query."

    def test_sequential_calls_stay_in_sync(self, scorer):
        for i in range(10):
            summary = scorer.summarize(f"q{i}", ["p."] * (i + 1))
            assert summary == f"summary of {i + 1} paragraphs about q{i}."

    def test_unicode_payload(self, scorer):
        summary = scorer.summarize("étude café", ["naïve résumé."])
        assert summary == "summary of 1 paragraphs about étude café."

    def test_declared_not_concurrency_safe(self, scorer):
        assert scorer.concurrency_safe is False

    def test_close_is_idempotent_via_context_manager(self):
        scorer = SubprocessScorer([sys.executable, FAKE_SCORER])
        assert scorer.extract_answers("q", ["p."]) == ["answer 0 for q"]
        scorer.close()
        assert scorer._proc.returncode == 0


class TestInsidePipeline:
    def test_spans_and_summary_propagate(self, snapshot_small, scorer):
        output = run_search(snapshot_small, "ace2 receptor", scorer=scorer)
        assert output.answer_spans == [
            "answer 0 for ace2 receptor",
            "answer 1 for ace2 receptor",
            "answer 2 for ace2 receptor",
        ]
        assert output.summary.startswith("summary of ")
        assert output.summary.endswith("paragraphs about ace2 receptor.")

    def test_concurrent_searches_serialize_cleanly(self, snapshot_small, scorer):
        """Parallel run_search calls share one scorer process without corruption."""

        def search(_):
            return run_search(snapshot_small, "ace2 receptor binding", scorer=scorer)

        with concurrent.futures.ThreadPoolExecutor(max_workers=6) as pool:
            outputs = list(pool.map(search, range(12)))
        assert all(o == outputs[0] for o in outputs[1:])
        assert outputs[0].answer_spans[0] == "answer 0 for ace2 receptor binding"
