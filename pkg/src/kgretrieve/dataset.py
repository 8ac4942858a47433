"""Claim records.

The claim file is JSON Lines, one object per claim::

    {"id": "train-0", "claim": "...", "entities": ["Meyer_Werft", ...],
     "label": true, "types": ["one-hop"], "split": "train"}

``label`` may be ``null`` for unlabelled claims. ``subgraph`` (gold evidence,
list of ``[head, relation, tail]``) and ``schema_version`` are optional;
any other key is rejected.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

__all__ = [
    "REASONING_TYPES",
    "SPLITS",
    "SCHEMA_VERSION",
    "ClaimRecord",
    "MalformedRecord",
    "UnknownTypeTag",
    "UnknownSplit",
    "load_claims",
    "dump_claims",
    "split_counts",
    "filter_by_type",
]

# column order of the per-type report
REASONING_TYPES = ("one-hop", "conjunction", "existence", "multi-hop", "negation")
SPLITS = ("train", "validation", "test")
SCHEMA_VERSION = 1

_REQUIRED = ("id", "claim", "entities", "label", "types", "split")
_OPTIONAL = ("subgraph", "schema_version")


class MalformedRecord(ValueError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class UnknownTypeTag(ValueError):
    def __init__(self, tag, line: int | None = None):
        self.tag = tag
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}unknown reasoning type {tag!r}")


class UnknownSplit(ValueError):
    def __init__(self, value, line: int | None = None):
        self.value = value
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}unknown split {value!r}")


@dataclass(frozen=True)
class ClaimRecord:
    id: str
    claim: str
    entities: tuple[str, ...]
    label: bool | None
    types: frozenset[str]
    split: str
    subgraph: tuple[tuple[str, str, str], ...] | None = None

    def to_dict(self) -> dict:
        rec = {
            "id": self.id,
            "claim": self.claim,
            "entities": list(self.entities),
            "label": self.label,
            # stored in report-column order so dumps are stable
            "types": [t for t in REASONING_TYPES if t in self.types],
            "split": self.split,
        }
        if self.subgraph is not None:
            rec["subgraph"] = [list(t) for t in self.subgraph]
        return rec


def _parse_record(obj, lineno: int) -> ClaimRecord:
    if not isinstance(obj, dict):
        raise MalformedRecord(lineno, "record is not a JSON object")
    missing = [k for k in _REQUIRED if k not in obj]
    if missing:
        raise MalformedRecord(lineno, f"missing field(s): {', '.join(missing)}")
    extra = sorted(set(obj) - set(_REQUIRED) - set(_OPTIONAL))
    if extra:
        raise MalformedRecord(lineno, f"unexpected field(s): {', '.join(extra)}")

    cid, claim, entities, label = obj["id"], obj["claim"], obj["entities"], obj["label"]
    if isinstance(cid, int) and not isinstance(cid, bool):
        cid = str(cid)
    if not isinstance(cid, str) or not cid:
        raise MalformedRecord(lineno, "id must be a non-empty string")
    if not isinstance(claim, str):
        raise MalformedRecord(lineno, "claim must be a string")
    if not isinstance(entities, list) or not entities:
        raise MalformedRecord(lineno, "entities must be a non-empty list")
    if not all(isinstance(e, str) and e for e in entities):
        raise MalformedRecord(lineno, "entities must be non-empty strings")
    if label is not None and not isinstance(label, bool):
        raise MalformedRecord(lineno, "label must be true, false or null")

    types = obj["types"]
    if not isinstance(types, list) or not types:
        raise MalformedRecord(lineno, "types must be a non-empty list")
    for t in types:
        if t not in REASONING_TYPES:
            raise UnknownTypeTag(t, lineno)

    split = obj["split"]
    if split not in SPLITS:
        raise UnknownSplit(split, lineno)

    version = obj.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise MalformedRecord(lineno, f"unsupported schema_version {version!r}")

    subgraph = obj.get("subgraph")
    if subgraph is not None:
        if not isinstance(subgraph, list) or not all(
            isinstance(t, list) and len(t) == 3 and all(isinstance(x, str) for x in t)
            for t in subgraph
        ):
            raise MalformedRecord(lineno, "subgraph must be a list of [head, relation, tail]")
        subgraph = tuple(tuple(t) for t in subgraph)

    return ClaimRecord(
        id=cid,
        claim=claim,
        entities=tuple(entities),
        label=label,
        types=frozenset(types),
        split=split,
        subgraph=subgraph,
    )


def load_claims(source: IO[bytes] | IO[str] | Iterable[str | bytes]) -> list[ClaimRecord]:
    records = []
    for lineno, raw in enumerate(source, start=1):
        if isinstance(raw, bytes):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError:
                raise MalformedRecord(lineno, "invalid UTF-8") from None
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(lineno, f"invalid JSON ({exc.msg})") from None
        records.append(_parse_record(obj, lineno))
    return records


def dump_claims(claims: Iterable[ClaimRecord], sink: IO[str]) -> int:
    n = 0
    for c in claims:
        sink.write(json.dumps(c.to_dict(), ensure_ascii=False) + "\n")
        n += 1
    return n


def split_counts(claims: Iterable[ClaimRecord]) -> dict[str, int]:
    counts = Counter(c.split for c in claims)
    return {s: counts.get(s, 0) for s in SPLITS}


def filter_by_type(claims: Sequence[ClaimRecord], tag: str) -> list[ClaimRecord]:
    if tag not in REASONING_TYPES:
        raise UnknownTypeTag(tag)
    return [c for c in claims if tag in c.types]
