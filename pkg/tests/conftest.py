from __future__ import annotations

import pytest

from scisearch.corpus import Document
from scisearch.snapshot import PipelineConfig, Snapshot, build_snapshot
from synth import make_corpus


@pytest.fixture
def docs_small() -> list[Document]:
    return [
        Document(
            id="d1",
            title="Spike protein binding",
            abstract="The spike protein binds the ace2 receptor. Cells express it widely.",
            body=["Receptor binding happens at the cell membrane.\n\nAffinity varies by strain."],
            captions=["Fig 1 binding assay"],
        ),
        Document(
            id="d2",
            title="Vaccine trial outcomes",
            abstract="Trial outcomes for the candidate vaccine were positive.",
            body=["Participants showed strong antibody response."],
        ),
        Document(
            id="d3",
            title="Genome sequencing methods",
            abstract="Sequencing pipelines for viral genomes.",
            body=["Assembly quality depends on read depth."],
        ),
    ]


@pytest.fixture(scope="session")
def corpus50() -> list[Document]:
    return make_corpus(50, seed=7)


@pytest.fixture(scope="session")
def snapshot50(corpus50) -> Snapshot:
    return build_snapshot(corpus50, PipelineConfig())


@pytest.fixture
def snapshot_small(docs_small) -> Snapshot:
    return build_snapshot(docs_small, PipelineConfig())
