"""Dense text embeddings behind a pluggable interface.

The reference embedder is a seeded random projection of hashed token
trigrams: deterministic, dependency-free, and similar texts (sharing many
trigrams) land near each other. Any object with `dim`, `identifier`, and
`embed(text) -> vector` can replace it, e.g. a neural encoder client.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from typing import Protocol

import numpy as np

from scisearch.index import tokenize

DEFAULT_DIM = 256


class Embedder(Protocol):
    dim: int
    identifier: str

    def embed(self, text: str) -> np.ndarray: ...


def unit_normalize(v: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return v / norm


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity clipped to [-1, 1]; 0 if either vector is zero."""
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def token_trigrams(text: str) -> Counter[str]:
    """Character trigrams of each token padded as ^token$."""
    grams: Counter[str] = Counter()
    for token in tokenize(text):
        padded = f"^{token}$"
        for i in range(len(padded) - 2):
            grams[padded[i : i + 3]] += 1
    return grams


class HashingTrigramEmbedder:
    """Deterministic reference embedder over hashed token trigrams.

    Each trigram maps to a Gaussian direction seeded from its hash; a text
    embeds as the count-weighted sum of its trigram directions, unit
    normalized. Empty text maps to a fixed null unit vector.
    """

    def __init__(self, dim: int = DEFAULT_DIM, seed: int = 42):
        if dim < 2:
            raise ValueError(f"dim must be >= 2, got {dim}")
        self.dim = dim
        self.seed = seed
        self.identifier = f"hash-trigram-v1:d{dim}:s{seed}"
        self._features: dict[str, np.ndarray] = {}
        null = np.zeros(dim, dtype=np.float64)
        null[0] = 1.0
        self.null_vector = null

    def _feature(self, gram: str) -> np.ndarray:
        vec = self._features.get(gram)
        if vec is None:
            digest = hashlib.blake2b(
                f"{self.seed}:{gram}".encode("utf-8"), digest_size=8
            ).digest()
            rng = np.random.default_rng(int.from_bytes(digest, "big"))
            vec = rng.standard_normal(self.dim)
            self._features[gram] = vec
        return vec

    def embed(self, text: str) -> np.ndarray:
        grams = token_trigrams(text)
        if not grams:
            return self.null_vector.copy()
        acc = np.zeros(self.dim, dtype=np.float64)
        for gram, count in grams.items():
            acc += count * self._feature(gram)
        norm = float(np.linalg.norm(acc))
        if norm == 0.0:
            return self.null_vector.copy()
        return acc / norm

    def is_null(self, v: np.ndarray) -> bool:
        return bool(np.array_equal(v, self.null_vector))
