"""HTTP front door: GET /search and GET /health over an immutable snapshot.

The snapshot is attached to application state; replacing it is a single
reference swap, so concurrent readers always see a complete snapshot.
"""

from __future__ import annotations

from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException, Query

from scisearch.fusion import EmptyQueryError
from scisearch.pipeline import run_search
from scisearch.snapshot import Snapshot, load_snapshot

MAX_RESULTS = 100


def create_app(
    snapshot: Snapshot | None = None, snapshot_path: str | None = None
) -> FastAPI:
    @asynccontextmanager
    async def _lifespan(app: FastAPI):
        if app.state.snapshot is None and app.state.snapshot_path:
            app.state.snapshot = load_snapshot(app.state.snapshot_path)
        yield

    app = FastAPI(title="scisearch", version="0.1.0", lifespan=_lifespan)
    app.state.snapshot = snapshot
    app.state.snapshot_path = snapshot_path

    @app.get("/health")
    def health() -> dict:
        snap: Snapshot | None = app.state.snapshot
        return {
            "status": "ok",
            "ready": snap is not None,
            "documents": len(snap.documents) if snap else 0,
            "paragraphs": len(snap.paragraphs) if snap else 0,
        }

    @app.get("/search")
    def search(
        q: str = Query(default=""),
        n: int = Query(default=10),
        mu: float | None = Query(default=None),
        rrf_k: float | None = Query(default=None),
    ) -> dict:
        snap: Snapshot | None = app.state.snapshot
        if snap is None:
            raise HTTPException(status_code=503, detail="index not loaded")
        if not q.strip():
            raise HTTPException(status_code=400, detail="empty query")
        if not 0 <= n <= MAX_RESULTS:
            raise HTTPException(status_code=400, detail=f"n must be in [0, {MAX_RESULTS}]")
        if mu is not None and not 0.0 <= mu <= 1.0:
            raise HTTPException(status_code=400, detail="mu must be in [0, 1]")
        if rrf_k is not None and rrf_k <= 0:
            raise HTTPException(status_code=400, detail="rrf_k must be > 0")
        try:
            output = run_search(snap, q, n=n, mu=mu, rrf_k=rrf_k)
        except EmptyQueryError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return {
            "query": output.query,
            "mu": output.config.fusion.mu,
            "rrf_k": output.config.fusion.rrf_k,
            "count": len(output.results),
            "results": [
                {
                    "doc_id": hit.doc_id,
                    "title": hit.title,
                    "snippet": hit.snippet,
                    "final": hit.final,
                    "rrf": hit.rrf,
                    "q_factor": hit.q_factor,
                    "s_factor": hit.s_factor,
                }
                for hit in output.results
            ],
            "summary": output.summary,
            "answer_spans": output.answer_spans,
        }

    return app
