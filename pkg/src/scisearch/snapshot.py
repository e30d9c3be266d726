"""Build, persist, and reload search snapshots.

A snapshot bundles the corpus, its paragraphs, the dense embedding matrix,
the inverted index, and the pipeline configuration. On disk it is a
directory: manifest.json, documents.jsonl, paragraphs.jsonl,
embeddings.npy. Embeddings are persisted; the inverted index is rebuilt
from document text on load (tokenization is deterministic and the manifest
pins the tokenizer version). Saving the same corpus and config twice
produces byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from scisearch.corpus import CitationRef, Document, Paragraph, split_paragraphs
from scisearch.embedding import DEFAULT_DIM, HashingTrigramEmbedder
from scisearch.fusion import FusionConfig, SearchIndexes
from scisearch.index import (
    TOKENIZER_VERSION,
    Bm25Params,
    DenseIndex,
    InvertedIndex,
    ParagraphKey,
    build_inverted_index,
)
from scisearch.rank import RankConfig

FORMAT_VERSION = 1

_CONTENT_FILES = ("documents.jsonl", "paragraphs.jsonl", "embeddings.npy")


class SnapshotError(ValueError):
    """A snapshot directory is missing, corrupt, or incompatible."""


@dataclass(frozen=True)
class PipelineConfig:
    fusion: FusionConfig = field(default_factory=FusionConfig)
    bm25: Bm25Params = field(default_factory=Bm25Params)
    rank: RankConfig = field(default_factory=RankConfig)
    dim: int = DEFAULT_DIM
    embedder_seed: int = 42
    scorer_paragraphs: int = 20
    run_tag: str = "scisearch"

    def __post_init__(self) -> None:
        if self.scorer_paragraphs < 1:
            raise ValueError("scorer_paragraphs must be >= 1")
        if not self.run_tag or any(c.isspace() for c in self.run_tag):
            raise ValueError("run_tag must be non-empty without whitespace")

    def to_dict(self) -> dict:
        return {
            "mu": self.fusion.mu,
            "rrf_k": self.fusion.rrf_k,
            "pool_size": self.fusion.pool_size,
            "normalize_tfidf": self.fusion.normalize_tfidf,
            "k1": self.bm25.k1,
            "b": self.bm25.b,
            "answer_base": self.rank.answer_base,
            "summary_blend": self.rank.summary_blend,
            "max_spans": self.rank.max_spans,
            "summary_input_cap": self.rank.summary_input_cap,
            "summary_token_limit": self.rank.summary_token_limit,
            "first_sentences": self.rank.first_sentences,
            "dim": self.dim,
            "embedder_seed": self.embedder_seed,
            "scorer_paragraphs": self.scorer_paragraphs,
            "run_tag": self.run_tag,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        return cls(
            fusion=FusionConfig(
                mu=data["mu"],
                rrf_k=data["rrf_k"],
                pool_size=data["pool_size"],
                normalize_tfidf=data["normalize_tfidf"],
            ),
            bm25=Bm25Params(k1=data["k1"], b=data["b"]),
            rank=RankConfig(
                answer_base=data["answer_base"],
                summary_blend=data["summary_blend"],
                max_spans=data["max_spans"],
                summary_input_cap=data["summary_input_cap"],
                summary_token_limit=data["summary_token_limit"],
                first_sentences=data["first_sentences"],
            ),
            dim=data["dim"],
            embedder_seed=data["embedder_seed"],
            scorer_paragraphs=data["scorer_paragraphs"],
            run_tag=data["run_tag"],
        )


class Snapshot:
    """Immutable search state: corpus, paragraphs, indexes, config."""

    def __init__(
        self,
        documents: list[Document],
        paragraphs: list[Paragraph],
        dense: DenseIndex,
        inverted: InvertedIndex,
        embedder: HashingTrigramEmbedder,
        config: PipelineConfig,
    ):
        self.documents = documents
        self.paragraphs = paragraphs
        self.dense = dense
        self.inverted = inverted
        self.embedder = embedder
        self.config = config
        self.doc_by_id: dict[str, Document] = {d.id: d for d in documents}
        self.paragraph_text: dict[ParagraphKey, str] = {
            (p.doc_id, p.ordinal): p.text for p in paragraphs
        }
        # Paragraph rows must be grouped by document so each document's
        # vectors are a contiguous matrix slice.
        self._doc_rows: dict[str, tuple[int, int]] = {}
        last_doc = None
        for i, key in enumerate(dense.keys):
            doc_id = key[0]
            if doc_id == last_doc:
                lo, _ = self._doc_rows[doc_id]
                self._doc_rows[doc_id] = (lo, i + 1)
            elif doc_id in self._doc_rows:
                raise ValueError(f"paragraphs of document {doc_id!r} are not contiguous")
            else:
                self._doc_rows[doc_id] = (i, i + 1)
                last_doc = doc_id
        self.indexes = SearchIndexes(
            inverted=inverted, dense=dense, embedder=embedder, bm25=config.bm25
        )

    def paragraph_matrix(self, doc_id: str) -> np.ndarray:
        """Embedding rows of a document's paragraphs (empty if unknown)."""
        rows = self._doc_rows.get(doc_id)
        if rows is None:
            return np.zeros((0, self.dense.dim), dtype=np.float64)
        return self.dense.matrix[rows[0] : rows[1]]

    def manifest(self, checksum: str) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "tokenizer_version": TOKENIZER_VERSION,
            "embedder": self.embedder.identifier,
            "document_count": len(self.documents),
            "paragraph_count": len(self.paragraphs),
            "checksum": checksum,
            "config": self.config.to_dict(),
        }


def indexable_paragraphs(doc: Document) -> list[Paragraph]:
    """split_paragraphs, with the whole text as a single fallback paragraph.

    Keeps the guarantee that every document has at least one embedded
    paragraph, which combine_scores and s_factor rely on.
    """
    paragraphs = split_paragraphs(doc)
    if not paragraphs:
        return [Paragraph(doc.id, 0, "body", doc.full_text() or doc.id)]
    return paragraphs


def build_snapshot(corpus: list[Document], config: PipelineConfig | None = None) -> Snapshot:
    if not corpus:
        raise ValueError("empty corpus")
    config = config or PipelineConfig()
    embedder = HashingTrigramEmbedder(dim=config.dim, seed=config.embedder_seed)
    paragraphs: list[Paragraph] = []
    for doc in corpus:
        paragraphs.extend(indexable_paragraphs(doc))
    entries = [((p.doc_id, p.ordinal), embedder.embed(p.text)) for p in paragraphs]
    dense = DenseIndex(entries, config.dim)
    inverted = build_inverted_index(corpus)
    return Snapshot(corpus, paragraphs, dense, inverted, embedder, config)


def _document_record(doc: Document) -> dict:
    return {
        "id": doc.id,
        "title": doc.title,
        "abstract": doc.abstract,
        "body": doc.body,
        "captions": doc.captions,
        "citations": [
            {
                "raw": c.raw,
                "normalized_title": c.normalized_title,
                "paragraph": None if c.source_paragraph is None else c.source_paragraph[1],
            }
            for c in doc.citations
        ],
    }


def _document_from_record(record: dict) -> Document:
    citations = [
        CitationRef(
            raw=c["raw"],
            normalized_title=c["normalized_title"],
            source_paragraph=None if c["paragraph"] is None else (record["id"], c["paragraph"]),
            ordinal_hint=c["paragraph"],
        )
        for c in record["citations"]
    ]
    return Document(
        id=record["id"],
        title=record["title"],
        abstract=record["abstract"],
        body=list(record["body"]),
        captions=list(record["captions"]),
        citations=citations,
    )


def _checksum(directory: Path) -> str:
    digest = hashlib.sha256()
    for name in _CONTENT_FILES:
        digest.update(name.encode("utf-8"))
        digest.update((directory / name).read_bytes())
    return digest.hexdigest()


def save_snapshot(snapshot: Snapshot, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "documents.jsonl", "w", encoding="utf-8") as fh:
        for doc in snapshot.documents:
            fh.write(json.dumps(_document_record(doc), sort_keys=True, ensure_ascii=False))
            fh.write("\n")
    with open(directory / "paragraphs.jsonl", "w", encoding="utf-8") as fh:
        for p in snapshot.paragraphs:
            record = {"doc_id": p.doc_id, "ordinal": p.ordinal, "kind": p.kind, "text": p.text}
            fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False))
            fh.write("\n")
    np.save(directory / "embeddings.npy", snapshot.dense.matrix)
    manifest = snapshot.manifest(_checksum(directory))
    with open(directory / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_snapshot(directory: str | Path, verify: bool = True) -> Snapshot:
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise SnapshotError(f"no manifest at {manifest_path}")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("format_version") != FORMAT_VERSION:
        raise SnapshotError(
            f"snapshot format {manifest.get('format_version')!r} unsupported "
            f"(expected {FORMAT_VERSION})"
        )
    if manifest.get("tokenizer_version") != TOKENIZER_VERSION:
        raise SnapshotError(
            f"snapshot tokenizer {manifest.get('tokenizer_version')!r} does not "
            f"match {TOKENIZER_VERSION!r}"
        )
    if verify:
        actual = _checksum(directory)
        if actual != manifest.get("checksum"):
            raise SnapshotError("snapshot checksum mismatch; files are corrupt or edited")
    config = PipelineConfig.from_dict(manifest["config"])
    documents: list[Document] = []
    with open(directory / "documents.jsonl", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                documents.append(_document_from_record(json.loads(line)))
    paragraphs: list[Paragraph] = []
    with open(directory / "paragraphs.jsonl", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                r = json.loads(line)
                paragraphs.append(Paragraph(r["doc_id"], r["ordinal"], r["kind"], r["text"]))
    matrix = np.load(directory / "embeddings.npy")
    embedder = HashingTrigramEmbedder(dim=config.dim, seed=config.embedder_seed)
    if manifest.get("embedder") != embedder.identifier:
        raise SnapshotError(
            f"snapshot embedder {manifest.get('embedder')!r} does not match "
            f"{embedder.identifier!r}"
        )
    keys = [(p.doc_id, p.ordinal) for p in paragraphs]
    if matrix.shape != (len(keys), config.dim):
        raise SnapshotError(
            f"embedding matrix shape {matrix.shape} does not match "
            f"{len(keys)} paragraphs of dimension {config.dim}"
        )
    dense = DenseIndex(list(zip(keys, matrix)), config.dim)
    inverted = build_inverted_index(documents)
    return Snapshot(documents, paragraphs, dense, inverted, embedder, config)


def config_with_overrides(
    config: PipelineConfig,
    mu: float | None = None,
    rrf_k: float | None = None,
    pool_size: int | None = None,
) -> PipelineConfig:
    fusion = config.fusion
    if mu is not None:
        fusion = replace(fusion, mu=mu)
    if rrf_k is not None:
        fusion = replace(fusion, rrf_k=rrf_k)
    if pool_size is not None:
        fusion = replace(fusion, pool_size=pool_size)
    return replace(config, fusion=fusion)
