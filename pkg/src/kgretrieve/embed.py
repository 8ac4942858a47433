"""Precomputed text embeddings and cosine relevance scoring.

Embedding file grammar (JSON Lines, UTF-8, one record per line)::

    {"text": "<node or edge text>", "vector": [c0, c1, ..., c(dim-1)]}

Every vector in a file has the same length; the first record fixes ``dim``.
Components are JSON numbers and must be finite.
"""

from __future__ import annotations

import json
import math
from types import MappingProxyType
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "DEFAULT_DIM",
    "EmbeddingTable",
    "EmbeddingError",
    "DimensionMismatch",
    "NonFiniteComponent",
    "DuplicateKey",
    "ZeroVector",
    "MissingEmbedding",
    "ShapeMismatch",
    "load_table",
    "save_table",
    "cosine",
    "relevance_scores",
    "scale_node_features",
]

DEFAULT_DIM = 768


class EmbeddingError(ValueError):
    pass


class DimensionMismatch(EmbeddingError):
    def __init__(self, expected: int, found: int, line: int | None = None):
        self.expected, self.found, self.line = expected, found, line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}expected {expected} components, got {found}")


class NonFiniteComponent(EmbeddingError):
    def __init__(self, line: int):
        self.line = line
        super().__init__(f"line {line}: vector has a non-finite component")


class DuplicateKey(EmbeddingError):
    def __init__(self, text: str, line: int | None = None):
        self.text, self.line = text, line
        super().__init__(f"duplicate embedding key {text!r}")


class ZeroVector(EmbeddingError):
    pass


class MissingEmbedding(KeyError):
    def __init__(self, text: str):
        self.text = text
        super().__init__(text)


class ShapeMismatch(ValueError):
    pass


class EmbeddingTable:
    """Read-only map from text to a fixed-length float vector."""

    def __init__(self, entries: Mapping[str, Sequence[float]] | None = None, dim: int | None = None):
        entries = dict(entries or {})
        if dim is None:
            dim = len(next(iter(entries.values()))) if entries else DEFAULT_DIM
        if dim <= 0:
            raise ValueError("dim must be positive")
        store = {}
        for text, vec in entries.items():
            arr = np.array(vec, dtype=np.float64)
            if arr.shape != (dim,):
                raise DimensionMismatch(dim, arr.size)
            if not np.all(np.isfinite(arr)):
                raise EmbeddingError(f"non-finite component in vector for {text!r}")
            arr.setflags(write=False)
            store[text] = arr
        self.dim = dim
        self._entries = MappingProxyType(store)

    @property
    def entries(self) -> Mapping[str, np.ndarray]:
        return self._entries

    def __len__(self):
        return len(self._entries)

    def __contains__(self, text):
        return text in self._entries

    def __getitem__(self, text: str) -> np.ndarray:
        try:
            return self._entries[text]
        except KeyError:
            raise MissingEmbedding(text) from None

    def __eq__(self, other):
        if not isinstance(other, EmbeddingTable):
            return NotImplemented
        return (
            self.dim == other.dim
            and self._entries.keys() == other._entries.keys()
            and all(np.array_equal(v, other._entries[k]) for k, v in self._entries.items())
        )

    __hash__ = None


def load_table(source: IO[str] | IO[bytes] | Iterable[str | bytes]) -> EmbeddingTable:
    entries: dict[str, list[float]] = {}
    dim = None
    for lineno, raw in enumerate(source, start=1):
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise EmbeddingError(f"line {lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(rec, dict) or not isinstance(rec.get("text"), str) or not isinstance(rec.get("vector"), list):
            raise EmbeddingError(f"line {lineno}: expected {{\"text\": str, \"vector\": [...]}}")
        text, vec = rec["text"], rec["vector"]
        if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in vec):
            raise EmbeddingError(f"line {lineno}: vector components must be numbers")
        if dim is None:
            if not vec:
                raise DimensionMismatch(1, 0, lineno)
            dim = len(vec)
        elif len(vec) != dim:
            raise DimensionMismatch(dim, len(vec), lineno)
        if not all(math.isfinite(x) for x in vec):
            raise NonFiniteComponent(lineno)
        if text in entries:
            raise DuplicateKey(text, lineno)
        entries[text] = vec
    return EmbeddingTable(entries, dim)


def save_table(table: EmbeddingTable, sink: IO[str]) -> int:
    n = 0
    for text, vec in table.entries.items():
        # float repr round-trips exactly through json
        sink.write(json.dumps({"text": text, "vector": [float(x) for x in vec]}, ensure_ascii=False))
        sink.write("\n")
        n += 1
    return n


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise DimensionMismatch(u.size, v.size)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine similarity is undefined for a zero vector")
    value = float(np.dot(u, v) / (nu * nv))
    return min(1.0, max(-1.0, value))


def relevance_scores(claim_vec, node_texts: Sequence[str], table: EmbeddingTable) -> list[float]:
    claim_vec = np.asarray(claim_vec, dtype=np.float64)
    if claim_vec.shape != (table.dim,):
        raise DimensionMismatch(table.dim, claim_vec.size)
    return [cosine(claim_vec, table[text]) for text in node_texts]


def scale_node_features(features, scores: Sequence[float]) -> np.ndarray:
    """Multiply row ``i`` of the node-feature matrix by ``scores[i]``."""
    x = np.asarray(features, dtype=np.float64)
    s = np.asarray(scores, dtype=np.float64)
    if x.ndim != 2 or s.ndim != 1 or x.shape[0] != s.shape[0]:
        raise ShapeMismatch(f"{x.shape[0] if x.ndim else 0} feature rows vs {s.size} scores")
    return x * s[:, None]
