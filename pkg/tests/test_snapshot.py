from __future__ import annotations

import json

import numpy as np
import pytest

from scisearch.corpus import CitationRef, Document
from scisearch.embedding import HashingTrigramEmbedder
from scisearch.fusion import FusionConfig, retrieve
from scisearch.index import Bm25Params, DenseIndex
from scisearch.snapshot import (
    PipelineConfig,
    Snapshot,
    SnapshotError,
    build_snapshot,
    config_with_overrides,
    indexable_paragraphs,
    load_snapshot,
    save_snapshot,
)
from synth import make_corpus, make_queries


class TestPipelineConfig:
    def test_dict_round_trip(self):
        config = PipelineConfig(
            fusion=FusionConfig(mu=0.4, rrf_k=30.0, pool_size=50, normalize_tfidf=False),
            bm25=Bm25Params(k1=1.2, b=0.75),
            dim=32,
            embedder_seed=7,
            scorer_paragraphs=5,
            run_tag="mytag",
        )
        assert PipelineConfig.from_dict(config.to_dict()) == config

    def test_scorer_paragraphs_positive(self):
        with pytest.raises(ValueError):
            PipelineConfig(scorer_paragraphs=0)

    def test_run_tag_no_whitespace(self):
        with pytest.raises(ValueError):
            PipelineConfig(run_tag="two words")
        with pytest.raises(ValueError):
            PipelineConfig(run_tag="")


class TestConfigWithOverrides:
    def test_overrides_apply(self):
        base = PipelineConfig()
        out = config_with_overrides(base, mu=0.2, rrf_k=10.0, pool_size=7)
        assert out.fusion.mu == 0.2
        assert out.fusion.rrf_k == 10.0
        assert out.fusion.pool_size == 7
        assert base.fusion.mu == 0.7

    def test_none_means_keep(self):
        base = PipelineConfig(fusion=FusionConfig(mu=0.3))
        assert config_with_overrides(base) == base
        assert config_with_overrides(base, rrf_k=5.0).fusion.mu == 0.3

    def test_invalid_override_rejected(self):
        with pytest.raises(ValueError):
            config_with_overrides(PipelineConfig(), mu=1.5)


class TestIndexableParagraphs:
    def test_normal_document_uses_splitter(self, docs_small):
        paragraphs = indexable_paragraphs(docs_small[0])
        assert [p.ordinal for p in paragraphs] == list(range(len(paragraphs)))
        assert len(paragraphs) >= 3

    def test_textless_document_gets_fallback(self):
        doc = Document(id="bare")
        (p,) = indexable_paragraphs(doc)
        assert (p.doc_id, p.ordinal, p.kind, p.text) == ("bare", 0, "body", "bare")

    def test_title_only_document_falls_back_to_full_text(self):
        doc = Document(id="t1", title="Only a title")
        (p,) = indexable_paragraphs(doc)
        assert p.text == "Only a title"


class TestBuildSnapshot:
    def test_counts_and_lookup(self, snapshot50, corpus50):
        assert len(snapshot50.documents) == 50
        assert set(snapshot50.doc_by_id) == {d.id for d in corpus50}
        assert len(snapshot50.paragraphs) == len(snapshot50.dense.keys)
        for p in snapshot50.paragraphs:
            assert snapshot50.paragraph_text[(p.doc_id, p.ordinal)] == p.text

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            build_snapshot([])

    def test_every_document_has_rows(self, snapshot50, corpus50):
        for doc in corpus50:
            assert snapshot50.paragraph_matrix(doc.id).shape[0] >= 1

    def test_paragraph_matrix_slices_align(self, snapshot50):
        for i, key in enumerate(snapshot50.dense.keys):
            matrix = snapshot50.paragraph_matrix(key[0])
            row_in_doc = [k for k in snapshot50.dense.keys if k[0] == key[0]].index(key)
            assert np.array_equal(matrix[row_in_doc], snapshot50.dense.matrix[i])

    def test_unknown_doc_matrix_is_empty(self, snapshot50):
        matrix = snapshot50.paragraph_matrix("missing")
        assert matrix.shape == (0, snapshot50.dense.dim)

    def test_non_contiguous_paragraphs_rejected(self, docs_small):
        embedder = HashingTrigramEmbedder(dim=16, seed=1)
        keys = [("a", 0), ("b", 0), ("a", 1)]
        entries = [(k, embedder.embed(k[0])) for k in keys]
        dense = DenseIndex(entries, 16)
        from scisearch.index import build_inverted_index

        with pytest.raises(ValueError):
            Snapshot(docs_small, [], dense, build_inverted_index(docs_small), embedder, PipelineConfig(dim=16))


class TestSaveLoad:
    def test_round_trip_preserves_state(self, tmp_path, snapshot50):
        save_snapshot(snapshot50, tmp_path / "snap")
        loaded = load_snapshot(tmp_path / "snap")
        assert loaded.documents == snapshot50.documents
        assert loaded.paragraphs == snapshot50.paragraphs
        assert loaded.config == snapshot50.config
        assert np.array_equal(loaded.dense.matrix, snapshot50.dense.matrix)
        assert loaded.dense.keys == snapshot50.dense.keys

    def test_retrieval_identical_after_reload(self, tmp_path, snapshot50):
        save_snapshot(snapshot50, tmp_path / "snap")
        loaded = load_snapshot(tmp_path / "snap")
        for query in make_queries(5, seed=3):
            before = retrieve(query, snapshot50.config.fusion, snapshot50.indexes)
            after = retrieve(query, loaded.config.fusion, loaded.indexes)
            assert before.fused == after.fused

    def test_rebuild_is_byte_identical(self, tmp_path, corpus50):
        """Building and saving the same corpus twice writes identical bytes."""
        a = tmp_path / "a"
        b = tmp_path / "b"
        save_snapshot(build_snapshot(corpus50, PipelineConfig()), a)
        save_snapshot(build_snapshot(corpus50, PipelineConfig()), b)
        for name in ("manifest.json", "documents.jsonl", "paragraphs.jsonl", "embeddings.npy"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_save_after_load_is_byte_identical(self, tmp_path, snapshot50):
        first = tmp_path / "first"
        second = tmp_path / "second"
        save_snapshot(snapshot50, first)
        save_snapshot(load_snapshot(first), second)
        for name in ("manifest.json", "documents.jsonl", "paragraphs.jsonl", "embeddings.npy"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_citations_survive(self, tmp_path):
        doc = Document(
            id="d1",
            title="Title",
            abstract="Some abstract text.",
            citations=[
                CitationRef(
                    raw="[1] Cited Work",
                    normalized_title="cited work",
                    source_paragraph=("d1", 0),
                    ordinal_hint=0,
                ),
                CitationRef(raw="[2] Other", normalized_title="other"),
            ],
        )
        save_snapshot(build_snapshot([doc]), tmp_path / "snap")
        (loaded,) = load_snapshot(tmp_path / "snap").documents
        assert loaded.citations[0].normalized_title == "cited work"
        assert loaded.citations[0].source_paragraph == ("d1", 0)
        assert loaded.citations[1].source_paragraph is None

    def test_unicode_survives(self, tmp_path):
        doc = Document(id="u1", title="Étude café", abstract="naïve approach résumé.")
        save_snapshot(build_snapshot([doc]), tmp_path / "snap")
        (loaded,) = load_snapshot(tmp_path / "snap").documents
        assert loaded.title == "Étude café"

    def test_manifest_contents(self, tmp_path, snapshot50):
        save_snapshot(snapshot50, tmp_path / "snap")
        manifest = json.loads((tmp_path / "snap" / "manifest.json").read_text())
        assert manifest["format_version"] == 1
        assert manifest["tokenizer_version"] == "unicode-alnum-v1"
        assert manifest["document_count"] == 50
        assert manifest["embedder"] == snapshot50.embedder.identifier
        assert manifest["config"]["mu"] == 0.7


class TestLoadRejections:
    @pytest.fixture
    def saved(self, tmp_path, docs_small):
        path = tmp_path / "snap"
        save_snapshot(build_snapshot(docs_small, PipelineConfig(dim=32)), path)
        return path

    def edit_manifest(self, path, **changes):
        manifest_path = path / "manifest.json"
        manifest = json.loads(manifest_path.read_text())
        manifest.update(changes)
        manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")

    def test_missing_directory(self, tmp_path):
        with pytest.raises(SnapshotError):
            load_snapshot(tmp_path / "nowhere")

    def test_corrupt_content_detected(self, saved):
        docs = saved / "documents.jsonl"
        docs.write_text(docs.read_text().replace("spike", "tampered"))
        with pytest.raises(SnapshotError) as excinfo:
            load_snapshot(saved)
        assert "checksum" in str(excinfo.value)

    def test_verify_false_skips_checksum(self, saved):
        docs = saved / "documents.jsonl"
        docs.write_text(docs.read_text().replace("spike", "tampered"))
        loaded = load_snapshot(saved, verify=False)
        assert len(loaded.documents) == 3

    def test_unknown_format_version(self, saved):
        self.edit_manifest(saved, format_version=99)
        with pytest.raises(SnapshotError) as excinfo:
            load_snapshot(saved)
        assert "format" in str(excinfo.value)

    def test_tokenizer_mismatch(self, saved):
        self.edit_manifest(saved, tokenizer_version="other-v9")
        with pytest.raises(SnapshotError) as excinfo:
            load_snapshot(saved)
        assert "tokenizer" in str(excinfo.value)

    def test_embedder_mismatch(self, saved):
        self.edit_manifest(saved, embedder="hash-trigram-v1:d32:s999")
        with pytest.raises(SnapshotError) as excinfo:
            load_snapshot(saved)
        assert "embedder" in str(excinfo.value)

    def test_matrix_shape_mismatch(self, saved):
        np.save(saved / "embeddings.npy", np.zeros((2, 8)))
        with pytest.raises(SnapshotError) as excinfo:
            load_snapshot(saved, verify=False)
        assert "shape" in str(excinfo.value)
