"""Backend selection for the scoring kernels.

Prefers the compiled extension, falls back to pure Python. Set
SCISEARCH_PURE=1 to force the pure backend (used by tests and benchmarks
to compare both implementations).
"""

from __future__ import annotations

import os

from scisearch import _scoring_py

_FORCE_PURE = os.environ.get("SCISEARCH_PURE", "").strip().lower() in {"1", "true", "yes"}

try:
    from scisearch import _scoring  # type: ignore[attr-defined]
except ImportError:
    _scoring = None

if _scoring is not None and not _FORCE_PURE:
    BACKEND = "cython"
    _impl = _scoring
else:
    BACKEND = "python"
    _impl = _scoring_py

bm25_accumulate = _impl.bm25_accumulate
tfidf_accumulate = _impl.tfidf_accumulate


def available_backends() -> dict[str, object]:
    """Importable kernel backends keyed by name."""
    backends: dict[str, object] = {"python": _scoring_py}
    if _scoring is not None:
        backends["cython"] = _scoring
    return backends
