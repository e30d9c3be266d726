"""TREC-style evaluation: qrels/run files, P@N, nDCG, MAP, Bpref, Judged@n.

Metric functions take a topic's retrieved doc_ids in rank order plus that
topic's grades (doc_id -> 0/1/2). All metrics are rank-only: scores in the
run file never influence them. nDCG and Bpref each have two selectable
variants; see ndcg_at_n and bpref.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

NDCG_VARIANTS = ("classic", "trec")
BPREF_VARIANTS = ("classic", "trec")

MAX_DOCS_PER_TOPIC = 1000

VALID_GRADES = (0, 1, 2)


class EvalFormatError(ValueError):
    """A qrels or run file violates its format."""


@dataclass
class Qrels:
    judgements: dict[tuple[int, str], int] = field(default_factory=dict)

    def topics(self) -> list[int]:
        return sorted({topic for topic, _ in self.judgements})

    def for_topic(self, topic_id: int) -> dict[str, int]:
        return {
            doc: grade
            for (topic, doc), grade in self.judgements.items()
            if topic == topic_id
        }


class RunEntry(NamedTuple):
    doc_id: str
    rank: int
    score: float
    tag: str


@dataclass
class RunFile:
    topics: dict[int, list[RunEntry]] = field(default_factory=dict)

    def validate(self) -> None:
        for topic_id, entries in self.topics.items():
            if len(entries) > MAX_DOCS_PER_TOPIC:
                raise EvalFormatError(
                    f"topic {topic_id}: {len(entries)} docs exceed the "
                    f"{MAX_DOCS_PER_TOPIC}-doc cap"
                )
            seen: set[str] = set()
            prev_score = None
            for i, entry in enumerate(entries):
                if entry.rank != i + 1:
                    raise EvalFormatError(
                        f"topic {topic_id}: rank {entry.rank} at position {i + 1}"
                    )
                if entry.doc_id in seen:
                    raise EvalFormatError(
                        f"topic {topic_id}: duplicate doc {entry.doc_id!r}"
                    )
                seen.add(entry.doc_id)
                if prev_score is not None and entry.score > prev_score:
                    raise EvalFormatError(
                        f"topic {topic_id}: score increases at rank {entry.rank}"
                    )
                prev_score = entry.score

    def doc_ids(self, topic_id: int) -> list[str]:
        return [e.doc_id for e in self.topics.get(topic_id, [])]

    @classmethod
    def from_ranked(cls, per_topic: dict[int, Iterable[tuple[str, float]]], tag: str) -> "RunFile":
        run = cls()
        for topic_id, entries in per_topic.items():
            run.topics[topic_id] = [
                RunEntry(doc_id, i + 1, float(score), tag)
                for i, (doc_id, score) in enumerate(entries)
            ]
        run.validate()
        return run


def relevant_count(grades: dict[str, int], threshold: int = 1) -> int:
    return sum(1 for g in grades.values() if g >= threshold)


def precision_at_n(ranked: list[str], grades: dict[str, int], n: int, threshold: int = 1) -> float:
    """Relevant docs in the top n, divided by n (short lists stay over n)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    hits = sum(1 for doc in ranked[:n] if grades.get(doc, 0) >= threshold)
    return hits / n


def _dcg(gains: list[int], variant: str) -> float:
    if variant == "classic":
        # First position undiscounted, then rel_i / log2(i).
        total = float(gains[0]) if gains else 0.0
        for i, gain in enumerate(gains[1:], start=2):
            total += gain / math.log2(i)
        return total
    if variant == "trec":
        return sum(gain / math.log2(i + 1) for i, gain in enumerate(gains, start=1))
    raise ValueError(f"unknown ndcg variant: {variant!r}")


def ndcg_at_n(
    ranked: list[str], grades: dict[str, int], n: int, variant: str = "classic"
) -> float:
    """DCG over the top n (unjudged docs gain 0) divided by the ideal DCG.

    The ideal ranking uses every grade in the topic's qrels, sorted
    descending, truncated at n. Returns 0 when the ideal DCG is 0.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    gains = [grades.get(doc, 0) for doc in ranked[:n]]
    ideal = sorted(grades.values(), reverse=True)[:n]
    idcg = _dcg(ideal, variant)
    if idcg == 0.0:
        return 0.0
    return _dcg(gains, variant) / idcg


def average_precision(ranked: list[str], grades: dict[str, int], threshold: int = 1) -> float:
    """Mean of P@k over the ranks k holding relevant docs, over all relevant."""
    total_relevant = relevant_count(grades, threshold)
    if total_relevant == 0:
        return 0.0
    hits = 0
    total = 0.0
    for k, doc in enumerate(ranked, start=1):
        if grades.get(doc, 0) >= threshold:
            hits += 1
            total += hits / k
    return total / total_relevant


def bpref(
    ranked: list[str],
    grades: dict[str, int],
    variant: str = "classic",
    threshold: int = 1,
) -> float:
    """Preference between judged docs only; unjudged docs are skipped.

    classic: contribution 1 - min(nonrel_before, R)/R, summed over relevant
    retrieved docs, divided by R. trec: denominator min(R, N) where N is the
    number of judged non-relevant docs (matches common toolkits).
    """
    if variant not in BPREF_VARIANTS:
        raise ValueError(f"unknown bpref variant: {variant!r}")
    r_total = relevant_count(grades, threshold)
    if r_total == 0:
        return 0.0
    n_total = sum(1 for g in grades.values() if g < threshold)
    cap = r_total if variant == "classic" else min(r_total, n_total)
    nonrel_seen = 0
    total = 0.0
    for doc in ranked:
        grade = grades.get(doc)
        if grade is None:
            continue
        if grade >= threshold:
            if cap > 0:
                total += 1.0 - min(nonrel_seen, cap) / cap
            else:
                total += 1.0
        else:
            nonrel_seen += 1
    return total / r_total


def judged_at_n(ranked: list[str], grades: dict[str, int], n: int) -> float:
    """Fraction of the top n that carries any judgement."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    judged = sum(1 for doc in ranked[:n] if doc in grades)
    return judged / n


def mean_average_precision(run: RunFile, qrels: Qrels, threshold: int = 1) -> float:
    """Unweighted mean AP over qrels topics; topics missing from the run score 0."""
    topics = qrels.topics()
    if not set(topics) & set(run.topics):
        raise ValueError("run and qrels share no topics")
    values = [
        average_precision(run.doc_ids(topic), qrels.for_topic(topic), threshold)
        for topic in topics
    ]
    return sum(values) / len(values)


@dataclass(frozen=True)
class EvalConfig:
    judged_only: bool = False
    ndcg_variant: str = "classic"
    bpref_variant: str = "classic"
    rel_threshold: int = 1

    def __post_init__(self) -> None:
        if self.ndcg_variant not in NDCG_VARIANTS:
            raise ValueError(f"unknown ndcg variant: {self.ndcg_variant!r}")
        if self.bpref_variant not in BPREF_VARIANTS:
            raise ValueError(f"unknown bpref variant: {self.bpref_variant!r}")
        if self.rel_threshold < 1:
            raise ValueError("rel_threshold must be >= 1")


PER_TOPIC_METRICS = ("p_at_5", "p_at_10", "ndcg_at_10", "ap", "bpref", "judged_at_5", "judged_at_10")

MEAN_KEYS = {"ap": "map"}


@dataclass
class MetricReport:
    per_topic: dict[int, dict[str, float]]
    means: dict[str, float]
    config: EvalConfig

    def to_json(self) -> str:
        payload = {
            "config": {
                "judged_only": self.config.judged_only,
                "ndcg_variant": self.config.ndcg_variant,
                "bpref_variant": self.config.bpref_variant,
                "rel_threshold": self.config.rel_threshold,
            },
            "per_topic": {str(t): v for t, v in self.per_topic.items()},
            "means": self.means,
        }
        return json.dumps(payload, sort_keys=True, indent=2)

    def render_table(self) -> str:
        mean_names = [MEAN_KEYS.get(m, m) for m in PER_TOPIC_METRICS]
        header = ["topic"] + list(PER_TOPIC_METRICS)
        rows = [header]
        for topic in sorted(self.per_topic):
            values = self.per_topic[topic]
            rows.append([str(topic)] + [f"{values[m]:.4f}" for m in PER_TOPIC_METRICS])
        rows.append(["mean"] + [f"{self.means[m]:.4f}" for m in mean_names])
        widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
        lines = [
            "  ".join(cell.rjust(widths[i]) for i, cell in enumerate(row))
            for row in rows
        ]
        return "\n".join(lines)


def evaluate_run(run: RunFile, qrels: Qrels, config: EvalConfig = EvalConfig()) -> MetricReport:
    """Per-topic metrics over qrels topics plus their unweighted means.

    judged-only mode drops unjudged docs from each topic's run before the
    precision-family metrics (P@N, nDCG, AP); Bpref is invariant to them by
    construction and Judged@n keeps the unfiltered run.
    """
    topics = qrels.topics()
    if not set(topics) & set(run.topics):
        raise ValueError("run and qrels share no topics")
    per_topic: dict[int, dict[str, float]] = {}
    threshold = config.rel_threshold
    for topic in topics:
        ranked = run.doc_ids(topic)
        grades = qrels.for_topic(topic)
        precision_input = (
            [d for d in ranked if d in grades] if config.judged_only else ranked
        )
        per_topic[topic] = {
            "p_at_5": precision_at_n(precision_input, grades, 5, threshold),
            "p_at_10": precision_at_n(precision_input, grades, 10, threshold),
            "ndcg_at_10": ndcg_at_n(precision_input, grades, 10, config.ndcg_variant),
            "ap": average_precision(precision_input, grades, threshold),
            "bpref": bpref(ranked, grades, config.bpref_variant, threshold),
            "judged_at_5": judged_at_n(ranked, grades, 5),
            "judged_at_10": judged_at_n(ranked, grades, 10),
        }
    means = {
        MEAN_KEYS.get(metric, metric): sum(per_topic[t][metric] for t in topics) / len(topics)
        for metric in PER_TOPIC_METRICS
    }
    return MetricReport(per_topic=per_topic, means=means, config=config)


def parse_qrels(path: str | Path) -> Qrels:
    """Read "topic_id iteration doc_id grade" lines; iteration is ignored."""
    path = Path(path)
    qrels = Qrels()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            fields = line.split()
            if len(fields) != 4:
                raise EvalFormatError(f"{where}: expected 4 fields, got {len(fields)}")
            topic_text, _iteration, doc_id, grade_text = fields
            try:
                topic_id = int(topic_text)
            except ValueError:
                raise EvalFormatError(f"{where}: topic id {topic_text!r} is not an integer") from None
            try:
                grade = int(grade_text)
            except ValueError:
                raise EvalFormatError(f"{where}: grade {grade_text!r} is not an integer") from None
            if grade not in VALID_GRADES:
                raise EvalFormatError(f"{where}: grade {grade} outside {{0, 1, 2}}")
            key = (topic_id, doc_id)
            if key in qrels.judgements:
                raise EvalFormatError(f"{where}: duplicate judgement for topic {topic_id}, doc {doc_id!r}")
            qrels.judgements[key] = grade
    return qrels


def write_qrels(qrels: Qrels, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for (topic_id, doc_id), grade in sorted(qrels.judgements.items()):
            fh.write(f"{topic_id} 0 {doc_id} {grade}\n")


def parse_run(path: str | Path) -> RunFile:
    """Read "topic_id Q0 doc_id rank score tag" lines, enforcing run invariants."""
    path = Path(path)
    run = RunFile()
    last_topic = None
    seen_docs: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            fields = line.split()
            if len(fields) != 6:
                raise EvalFormatError(f"{where}: expected 6 fields, got {len(fields)}")
            topic_text, _q0, doc_id, rank_text, score_text, tag = fields
            try:
                topic_id = int(topic_text)
            except ValueError:
                raise EvalFormatError(f"{where}: topic id {topic_text!r} is not an integer") from None
            try:
                rank = int(rank_text)
            except ValueError:
                raise EvalFormatError(f"{where}: rank {rank_text!r} is not an integer") from None
            try:
                score = float(score_text)
            except ValueError:
                raise EvalFormatError(f"{where}: score {score_text!r} is not a number") from None
            if topic_id != last_topic:
                if topic_id in run.topics:
                    raise EvalFormatError(f"{where}: topic {topic_id} appears in multiple blocks")
                if last_topic is not None and topic_id < last_topic:
                    raise EvalFormatError(f"{where}: topics not ascending ({last_topic} then {topic_id})")
                last_topic = topic_id
                run.topics[topic_id] = []
                seen_docs = set()
            entries = run.topics[topic_id]
            if rank != len(entries) + 1:
                raise EvalFormatError(f"{where}: rank {rank} breaks the 1..n sequence")
            if len(entries) >= MAX_DOCS_PER_TOPIC:
                raise EvalFormatError(f"{where}: topic {topic_id} exceeds {MAX_DOCS_PER_TOPIC} docs")
            if doc_id in seen_docs:
                raise EvalFormatError(f"{where}: duplicate doc {doc_id!r} in topic {topic_id}")
            seen_docs.add(doc_id)
            if entries and score > entries[-1].score:
                raise EvalFormatError(f"{where}: score increases at rank {rank}")
            entries.append(RunEntry(doc_id, rank, score, tag))
    return run


def write_run(run: RunFile, path: str | Path, tag: str | None = None) -> None:
    """Write the run in TREC format after re-checking its invariants."""
    run.validate()
    with open(path, "w", encoding="utf-8") as fh:
        for topic_id in sorted(run.topics):
            for entry in run.topics[topic_id]:
                out_tag = tag if tag is not None else entry.tag
                fh.write(
                    f"{topic_id} Q0 {entry.doc_id} {entry.rank} {entry.score!r} {out_tag}\n"
                )
