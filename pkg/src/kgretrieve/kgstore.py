"""Immutable triple store with forward and reverse adjacency.

Triples are loaded from a TAB-separated dump (``head<TAB>relation<TAB>tail``,
one per line, UTF-8). Each unique triple gets a dense ordinal equal to its
position among the unique triples of the source, so ``g.triple(o)`` and the
adjacency lists share one coordinate system.
"""

from __future__ import annotations

import os
import pickle
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import IO, Iterable, Iterator, Mapping, Sequence, Union

from kgretrieve._io import atomic_write

__all__ = [
    "Triple",
    "KnowledgeGraph",
    "MalformedLine",
    "IndexFormatError",
    "load_triples",
    "neighbors_out",
    "neighbors_in",
    "save_index",
    "load_index",
    "read_graph",
    "INDEX_MAGIC",
    "INDEX_VERSION",
]

INDEX_MAGIC = b"KGIDX\x00"
INDEX_VERSION = 1


class MalformedLine(ValueError):
    """A non-empty record line that is not exactly three TAB-separated fields."""

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class IndexFormatError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class Triple:
    head: str
    relation: str
    tail: str
    ordinal: int

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.head, self.relation, self.tail)


class KnowledgeGraph:
    """Indexed, read-only triple store.

    Column storage keeps a million-triple graph cheap; :class:`Triple`
    objects are materialised on demand.
    """

    __slots__ = ("_heads", "_relations", "_tails", "_fwd", "_rev", "_entities")

    def __init__(
        self,
        heads: Sequence[str],
        relations: Sequence[str],
        tails: Sequence[str],
        fwd: Mapping[str, tuple[int, ...]] | None = None,
        rev: Mapping[str, tuple[int, ...]] | None = None,
    ):
        if not (len(heads) == len(relations) == len(tails)):
            raise ValueError("column lengths differ")
        self._heads = tuple(heads)
        self._relations = tuple(relations)
        self._tails = tuple(tails)
        if fwd is None or rev is None:
            fwd, rev = _build_adjacency(self._heads, self._tails)
        self._fwd = MappingProxyType(dict(fwd))
        self._rev = MappingProxyType(dict(rev))
        self._entities = frozenset(self._fwd).union(self._rev)

    @classmethod
    def from_triples(cls, triples: Iterable[tuple[str, str, str]]) -> "KnowledgeGraph":
        """Build from ``(head, relation, tail)`` tuples, dropping repeats."""
        seen: set[tuple[str, str, str]] = set()
        heads: list[str] = []
        rels: list[str] = []
        tails: list[str] = []
        for h, r, t in triples:
            if not h or not r:
                raise ValueError(f"empty head or relation in {(h, r, t)!r}")
            k = (h, r, t)
            if k in seen:
                continue
            seen.add(k)
            heads.append(h)
            rels.append(r)
            tails.append(t)
        return cls(heads, rels, tails)

    def __len__(self) -> int:
        return len(self._heads)

    def __iter__(self) -> Iterator[Triple]:
        for o in range(len(self._heads)):
            yield self.triple(o)

    def __repr__(self) -> str:
        return f"KnowledgeGraph(triples={len(self)}, entities={len(self._entities)})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return (
            self._heads == other._heads
            and self._relations == other._relations
            and self._tails == other._tails
        )

    __hash__ = None  # type: ignore[assignment]

    def triple(self, ordinal: int) -> Triple:
        return Triple(self._heads[ordinal], self._relations[ordinal], self._tails[ordinal], ordinal)

    @property
    def triples(self) -> tuple[Triple, ...]:
        return tuple(self)

    @property
    def entities(self) -> frozenset[str]:
        return self._entities

    @property
    def forward_index(self) -> Mapping[str, tuple[int, ...]]:
        return self._fwd

    @property
    def reverse_index(self) -> Mapping[str, tuple[int, ...]]:
        return self._rev

    def head_of(self, ordinal: int) -> str:
        return self._heads[ordinal]

    def relation_of(self, ordinal: int) -> str:
        return self._relations[ordinal]

    def tail_of(self, ordinal: int) -> str:
        return self._tails[ordinal]

    def out_ordinals(self, entity: str) -> tuple[int, ...]:
        return self._fwd.get(entity, ())

    def in_ordinals(self, entity: str) -> tuple[int, ...]:
        return self._rev.get(entity, ())

    def neighbors_out(self, entity: str) -> list[Triple]:
        return [self.triple(o) for o in self._fwd.get(entity, ())]

    def neighbors_in(self, entity: str) -> list[Triple]:
        return [self.triple(o) for o in self._rev.get(entity, ())]

    def __getstate__(self):
        return (self._heads, self._relations, self._tails, dict(self._fwd), dict(self._rev))

    def __setstate__(self, state):
        heads, rels, tails, fwd, rev = state
        self._heads, self._relations, self._tails = heads, rels, tails
        self._fwd = MappingProxyType(fwd)
        self._rev = MappingProxyType(rev)
        self._entities = frozenset(fwd).union(rev)


def _build_adjacency(heads: Sequence[str], tails: Sequence[str]):
    fwd: dict[str, list[int]] = {}
    rev: dict[str, list[int]] = {}
    # ordinals are visited in ascending order, so every list comes out sorted
    for o, (h, t) in enumerate(zip(heads, tails)):
        lst = fwd.get(h)
        if lst is None:
            fwd[h] = [o]
        else:
            lst.append(o)
        lst = rev.get(t)
        if lst is None:
            rev[t] = [o]
        else:
            lst.append(o)
    return (
        {k: tuple(v) for k, v in fwd.items()},
        {k: tuple(v) for k, v in rev.items()},
    )


def load_triples(source: IO[bytes] | IO[str] | Iterable[bytes | str]) -> KnowledgeGraph:
    """Parse a TAB-separated triple dump into a :class:`KnowledgeGraph`.

    Empty lines are skipped. Duplicate triples keep their first position.
    Raises :class:`MalformedLine` (1-based line number) on the first bad record.
    """
    seen: set[tuple[str, str, str]] = set()
    heads: list[str] = []
    rels: list[str] = []
    tails: list[str] = []
    for lineno, raw in enumerate(source, start=1):
        if isinstance(raw, bytes):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise MalformedLine(lineno, f"invalid UTF-8 ({exc.reason})") from None
        else:
            line = raw
        line = line.rstrip("\n").rstrip("\r")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise MalformedLine(lineno, f"expected 3 TAB-separated fields, got {len(fields)}")
        h, r, t = fields
        if not h:
            raise MalformedLine(lineno, "empty head")
        if not r:
            raise MalformedLine(lineno, "empty relation")
        k = (h, r, t)
        if k in seen:
            continue
        seen.add(k)
        heads.append(h)
        rels.append(r)
        tails.append(t)
    return KnowledgeGraph(heads, rels, tails)


def neighbors_out(g: KnowledgeGraph, entity: str) -> list[Triple]:
    return g.neighbors_out(entity)


def neighbors_in(g: KnowledgeGraph, entity: str) -> list[Triple]:
    return g.neighbors_in(entity)


def save_index(g: KnowledgeGraph, path: Union[str, os.PathLike]) -> None:
    """Persist ``g`` to a cache file (magic header, version byte, pickle body).

    The file is written to a temporary sibling and renamed into place.
    """
    with atomic_write(path, "wb") as fh:
        fh.write(INDEX_MAGIC)
        fh.write(bytes([INDEX_VERSION]))
        pickle.dump(g, fh, protocol=pickle.HIGHEST_PROTOCOL)


def load_index(path: Union[str, os.PathLike]) -> KnowledgeGraph:
    with open(path, "rb") as fh:
        magic = fh.read(len(INDEX_MAGIC))
        if magic != INDEX_MAGIC:
            raise IndexFormatError(f"{path}: not a kgretrieve index cache")
        version = fh.read(1)
        if version != bytes([INDEX_VERSION]):
            raise IndexFormatError(
                f"{path}: unsupported index version {version[0] if version else None}"
            )
        g = pickle.load(fh)
    if not isinstance(g, KnowledgeGraph):
        raise IndexFormatError(f"{path}: payload is not a KnowledgeGraph")
    return g


def read_graph(path: Union[str, os.PathLike]) -> KnowledgeGraph:
    """Open either an index cache or a raw TSV dump, sniffing the header."""
    p = Path(path)
    with open(p, "rb") as fh:
        if fh.read(len(INDEX_MAGIC)) == INDEX_MAGIC:
            return load_index(p)
    with open(p, "rb") as fh:
        return load_triples(fh)
