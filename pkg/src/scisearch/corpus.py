"""Corpus ingestion, paragraph splitting, citation graph, training tuples.

Documents arrive as line-delimited JSON records (one per line, UTF-8),
either in a single file or spread over the files of a directory. Paragraph
splitting and graph construction are batch operations; the results are
immutable and safe to share across threads.
"""

from __future__ import annotations

import json
import logging
import random
import re
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)

_BLANK_LINE_RE = re.compile(r"\n\s*\n")
_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)

# Non-edge pools up to this size are enumerated outright; larger pools use
# rejection sampling to stay memory-bounded.
_ENUMERATION_LIMIT = 1_000_000


class CorpusFormatError(ValueError):
    """A document or topic record violates the input schema."""


class InsufficientNegativesError(ValueError):
    """The citation graph cannot supply enough negative pairs."""


def normalize_title(raw: str) -> str:
    """Lowercase, strip punctuation, and collapse whitespace."""
    return " ".join(_WORD_RE.findall(raw.lower()))


@dataclass
class CitationRef:
    """A citation extracted from a document, keyed by normalized title.

    source_paragraph is (doc_id, ordinal) once attached; None for refs
    parsed from a record whose paragraphs have not been split yet.
    """

    raw: str
    normalized_title: str
    source_paragraph: tuple[str, int] | None = None
    ordinal_hint: int | None = None


@dataclass
class Document:
    id: str
    title: str = ""
    abstract: str = ""
    body: list[str] = field(default_factory=list)
    captions: list[str] = field(default_factory=list)
    citations: list[CitationRef] = field(default_factory=list)
    source_path: str = ""

    def full_text(self) -> str:
        parts = [self.title, self.abstract, *self.body, *self.captions]
        return "\n".join(p for p in parts if p)


@dataclass(frozen=True)
class Paragraph:
    doc_id: str
    ordinal: int
    kind: str  # abstract | body | caption
    text: str


@dataclass(frozen=True)
class Topic:
    id: int
    query: str
    question: str = ""
    narrative: str = ""


@dataclass(frozen=True)
class TrainingTuple:
    paragraph_text: str
    citation_title: str
    label: str  # positive | negative


@dataclass
class BipartiteGraph:
    """Paragraph-citation graph; edges mean the citation appears in the paragraph."""

    paragraph_nodes: set[tuple[str, int]] = field(default_factory=set)
    citation_nodes: set[str] = field(default_factory=set)
    edges: set[tuple[tuple[str, int], str]] = field(default_factory=set)
    paragraph_texts: dict[tuple[str, int], str] = field(default_factory=dict)

    def add_edge(self, paragraph: tuple[str, int], text: str, title: str) -> None:
        self.paragraph_nodes.add(paragraph)
        self.citation_nodes.add(title)
        self.edges.add((paragraph, title))
        self.paragraph_texts[paragraph] = text

    def validate(self) -> None:
        for p, c in self.edges:
            if p not in self.paragraph_nodes or c not in self.citation_nodes:
                raise ValueError(f"dangling edge ({p!r}, {c!r})")


def _has_token(text: str) -> bool:
    return _WORD_RE.search(text.lower()) is not None


def _parse_citation(entry: object, where: str) -> CitationRef | None:
    if not isinstance(entry, dict):
        raise CorpusFormatError(f"{where}: citation entry must be an object")
    raw = entry.get("raw", "")
    title = entry.get("title", "")
    if not isinstance(raw, str) or not isinstance(title, str):
        raise CorpusFormatError(f"{where}: citation raw/title must be strings")
    normalized = normalize_title(title)
    if not normalized:
        return None
    hint = entry.get("paragraph")
    if hint is not None and (not isinstance(hint, int) or hint < 0):
        raise CorpusFormatError(f"{where}: citation paragraph hint must be a non-negative integer")
    return CitationRef(raw=raw, normalized_title=normalized, ordinal_hint=hint)


def _string_list(value: object, where: str, name: str) -> list[str]:
    if value is None:
        return []
    if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
        raise CorpusFormatError(f"{where}: {name} must be a list of strings")
    return value


def _parse_document(line: str, where: str) -> Document:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"{where}: invalid JSON ({exc.msg})") from None
    if not isinstance(record, dict):
        raise CorpusFormatError(f"{where}: record must be an object")
    doc_id = record.get("id")
    if not isinstance(doc_id, str) or not doc_id:
        raise CorpusFormatError(f"{where}: missing or empty id")
    title = record.get("title", "")
    abstract = record.get("abstract", "")
    if not isinstance(title, str) or not isinstance(abstract, str):
        raise CorpusFormatError(f"{where}: title and abstract must be strings")
    body = _string_list(record.get("body"), where, "body")
    captions = _string_list(record.get("captions"), where, "captions")
    if not title and not abstract and not any(s.strip() for s in body):
        raise CorpusFormatError(f"{where}: document has no title, abstract, or body")
    raw_citations = record.get("citations") or []
    if not isinstance(raw_citations, list):
        raise CorpusFormatError(f"{where}: citations must be a list")
    citations = []
    for entry in raw_citations:
        ref = _parse_citation(entry, where)
        if ref is not None:
            citations.append(ref)
    return Document(
        id=doc_id,
        title=title,
        abstract=abstract,
        body=list(body),
        captions=list(captions),
        citations=citations,
    )


def _corpus_files(path: Path) -> list[Path]:
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.is_file() and not p.name.startswith("."))
        if not files:
            return []
        return files
    return [path]


def load_corpus(path: str | Path, strict: bool = False) -> list[Document]:
    """Load documents from a JSONL file or a directory of JSONL files.

    Malformed records are skipped with a warning; in strict mode they raise
    CorpusFormatError naming the file and line number instead.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"corpus path does not exist: {path}")
    documents: list[Document] = []
    seen: set[str] = set()
    skipped = 0
    for file in _corpus_files(path):
        with open(file, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                where = f"{file}:{lineno}"
                try:
                    doc = _parse_document(line, where)
                    if doc.id in seen:
                        raise CorpusFormatError(f"{where}: duplicate document id {doc.id!r}")
                except CorpusFormatError as exc:
                    if strict:
                        raise
                    skipped += 1
                    logger.warning("skipping malformed record: %s", exc)
                    continue
                doc.source_path = str(file)
                seen.add(doc.id)
                documents.append(doc)
    if skipped:
        logger.warning("skipped %d malformed records", skipped)
    return documents


def split_paragraphs(doc: Document) -> list[Paragraph]:
    """Split a document into abstract, body, and caption paragraphs.

    Body sections are split on blank lines; fragments without a single
    token are dropped. Ordinals run in document order starting at 0.
    """
    paragraphs: list[Paragraph] = []

    def push(kind: str, text: str) -> None:
        text = text.strip()
        if text and _has_token(text):
            paragraphs.append(Paragraph(doc.id, len(paragraphs), kind, text))

    push("abstract", doc.abstract)
    for section in doc.body:
        for fragment in _BLANK_LINE_RE.split(section):
            push("body", fragment)
    for caption in doc.captions:
        push("caption", caption)
    return paragraphs


def attach_citations(doc: Document, paragraphs: list[Paragraph]) -> None:
    """Resolve each citation's source paragraph.

    Priority: explicit ordinal hint, then the first paragraph containing
    the raw citation string, then the document's first paragraph. Citations
    of a paragraph-less document stay unattached.
    """
    if not paragraphs:
        if doc.citations:
            logger.warning("document %s has citations but no paragraphs", doc.id)
        return
    by_ordinal = {p.ordinal: p for p in paragraphs}
    for ref in doc.citations:
        target = None
        if ref.ordinal_hint is not None:
            target = by_ordinal.get(ref.ordinal_hint)
        if target is None and ref.raw:
            target = next((p for p in paragraphs if ref.raw in p.text), None)
        if target is None:
            target = paragraphs[0]
        ref.source_paragraph = (target.doc_id, target.ordinal)


def build_bipartite_graph(corpus: list[Document]) -> BipartiteGraph:
    """Build the paragraph-citation graph over a corpus.

    Splits paragraphs, attaches citations to their source paragraphs, and
    dedupes citation titles by normalized form.
    """
    graph = BipartiteGraph()
    for doc in corpus:
        paragraphs = split_paragraphs(doc)
        attach_citations(doc, paragraphs)
        texts = {(p.doc_id, p.ordinal): p.text for p in paragraphs}
        for ref in doc.citations:
            if ref.source_paragraph is None:
                continue
            graph.add_edge(ref.source_paragraph, texts[ref.source_paragraph], ref.normalized_title)
    graph.validate()
    return graph


def generate_tuples(graph: BipartiteGraph, seed: int) -> list[TrainingTuple]:
    """Emit one positive tuple per edge plus an equal count of negatives.

    Negatives are sampled uniformly without replacement from the non-edge
    (paragraph, citation) pairs. Output order is deterministic given the
    seed: positives in sorted edge order, then negatives in draw order.
    """
    paragraphs = sorted(graph.paragraph_nodes)
    citations = sorted(graph.citation_nodes)
    if len(citations) < 2:
        raise InsufficientNegativesError(
            f"insufficient negatives: need at least 2 citation nodes, got {len(citations)}"
        )
    edges = sorted(graph.edges)
    needed = len(edges)
    if needed == 0:
        raise InsufficientNegativesError("insufficient negatives: graph has no edges")
    pool = len(paragraphs) * len(citations) - len(graph.edges)
    if pool < needed:
        raise InsufficientNegativesError(
            f"insufficient negatives: {pool} non-edges available for {needed} positives"
        )

    tuples = [
        TrainingTuple(graph.paragraph_texts[p], c, "positive") for p, c in edges
    ]
    rng = random.Random(seed)
    if len(paragraphs) * len(citations) <= _ENUMERATION_LIMIT:
        non_edges = [
            (p, c) for p in paragraphs for c in citations if (p, c) not in graph.edges
        ]
        sampled = rng.sample(non_edges, needed)
    else:
        sampled = []
        seen: set[tuple[tuple[str, int], str]] = set()
        while len(sampled) < needed:
            pair = (rng.choice(paragraphs), rng.choice(citations))
            if pair in graph.edges or pair in seen:
                continue
            seen.add(pair)
            sampled.append(pair)
    for p, c in sampled:
        tuples.append(TrainingTuple(graph.paragraph_texts[p], c, "negative"))
    return tuples


def load_topics(path: str | Path) -> list[Topic]:
    """Load topics from a JSONL file: {id, query, question, narrative} per line."""
    path = Path(path)
    topics: list[Topic] = []
    seen: set[int] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{where}: invalid JSON ({exc.msg})") from None
            if not isinstance(record, dict):
                raise CorpusFormatError(f"{where}: record must be an object")
            tid = record.get("id")
            if not isinstance(tid, int) or isinstance(tid, bool) or tid <= 0:
                raise CorpusFormatError(f"{where}: id must be a positive integer")
            if tid in seen:
                raise CorpusFormatError(f"{where}: duplicate topic id {tid}")
            query = record.get("query")
            if not isinstance(query, str) or not query.strip():
                raise CorpusFormatError(f"{where}: missing query")
            question = record.get("question", "")
            narrative = record.get("narrative", "")
            if not isinstance(question, str) or not isinstance(narrative, str):
                raise CorpusFormatError(f"{where}: question and narrative must be strings")
            seen.add(tid)
            topics.append(Topic(id=tid, query=query, question=question, narrative=narrative))
    return topics


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def _unescape(text: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            if nxt == "n":
                out.append("\n")
            elif nxt == "t":
                out.append("\t")
            elif nxt == "\\":
                out.append("\\")
            else:
                out.append(nxt)
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def write_tuples(tuples: list[TrainingTuple], path: str | Path) -> None:
    """Write tuples as TSV: label(1|0) TAB paragraph TAB title, text escaped."""
    with open(path, "w", encoding="utf-8") as fh:
        for t in tuples:
            label = "1" if t.label == "positive" else "0"
            fh.write(f"{label}\t{_escape(t.paragraph_text)}\t{_escape(t.citation_title)}\n")


def read_tuples(path: str | Path) -> list[TrainingTuple]:
    """Read tuples written by write_tuples."""
    tuples: list[TrainingTuple] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3 or parts[0] not in {"0", "1"}:
                raise CorpusFormatError(f"{path}:{lineno}: malformed tuple line")
            label = "positive" if parts[0] == "1" else "negative"
            tuples.append(TrainingTuple(_unescape(parts[1]), _unescape(parts[2]), label))
    return tuples
