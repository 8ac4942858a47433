"""Evidence linearisation.

A subgraph becomes ``claim | [h, r, t] [h, r, t] ...``. Triples are ordered
by the position of their earliest endpoint in the claim's entity list, then
by their position in the knowledge graph. An empty subgraph leaves the
claim untouched.

Record files (``emit_examples``) are JSON Lines with the fields
``id``, ``text``, ``label`` (omitted when unknown), ``strategy`` and
``fallback_applied``.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from typing import IO, TYPE_CHECKING, Iterable, Sequence

from kgretrieve.kgstore import Triple

if TYPE_CHECKING:
    from kgretrieve.dataset import ClaimRecord
    from kgretrieve.retrieval import Subgraph

__all__ = [
    "SEPARATOR",
    "SerializedExample",
    "LengthMismatch",
    "canonical_order",
    "triple_to_string",
    "claim_with_subgraph",
    "to_example",
    "emit_examples",
    "read_examples",
]

SEPARATOR = " | "


class LengthMismatch(ValueError):
    def __init__(self, left: int, right: int):
        self.left = left
        self.right = right
        super().__init__(f"sequence lengths differ: {left} != {right}")


@dataclass(frozen=True)
class SerializedExample:
    claim_id: str
    text: str
    label: bool | None
    strategy: str
    fallback_applied: bool = False

    def to_json(self) -> str:
        rec: dict = {"id": self.claim_id, "text": self.text}
        if self.label is not None:
            rec["label"] = self.label
        rec["strategy"] = self.strategy
        rec["fallback_applied"] = self.fallback_applied
        return json.dumps(rec, ensure_ascii=False, separators=(", ", ": "))

    @classmethod
    def from_json(cls, line: str) -> "SerializedExample":
        rec = json.loads(line)
        return cls(
            claim_id=rec["id"],
            text=rec["text"],
            label=rec.get("label"),
            strategy=rec["strategy"],
            fallback_applied=rec["fallback_applied"],
        )


def canonical_order(triples: Iterable[Triple], entities: Sequence[str]) -> list[Triple]:
    """Sort by (earliest entity-list index of either endpoint, ordinal).

    Triples touching no listed entity sort after all others, by ordinal.
    """
    pos: dict[str, int] = {}
    for i, e in enumerate(entities):
        pos.setdefault(e, i)
    n = len(entities)
    return sorted(
        triples,
        key=lambda t: (min(pos.get(t.head, n), pos.get(t.tail, n)), t.ordinal),
    )


def triple_to_string(t: Triple) -> str:
    return f"[{t.head}, {t.relation}, {t.tail}]"


def claim_with_subgraph(claim: str, sg: "Subgraph | Sequence[Triple]") -> str:
    triples = getattr(sg, "triples", sg)
    if not triples:
        return claim
    return claim + SEPARATOR + " ".join(triple_to_string(t) for t in triples)


def to_example(claim: "ClaimRecord", sg: "Subgraph") -> SerializedExample:
    return SerializedExample(
        claim_id=claim.id,
        text=claim_with_subgraph(claim.claim, sg),
        label=claim.label,
        strategy=sg.strategy.value,
        fallback_applied=sg.fallback_applied,
    )


def emit_examples(
    claims: Sequence["ClaimRecord"],
    subgraphs: Sequence["Subgraph"],
    sink: IO[str] | IO[bytes],
) -> int:
    """Write one JSON record per claim to ``sink``; returns the record count."""
    if len(claims) != len(subgraphs):
        raise LengthMismatch(len(claims), len(subgraphs))
    binary = isinstance(sink, (io.RawIOBase, io.BufferedIOBase)) or "b" in getattr(sink, "mode", "")
    n = 0
    for claim, sg in zip(claims, subgraphs):
        line = to_example(claim, sg).to_json() + "\n"
        sink.write(line.encode("utf-8") if binary else line)
        n += 1
    return n


def read_examples(source: Iterable[str | bytes]) -> list[SerializedExample]:
    out = []
    for raw in source:
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        if line.strip():
            out.append(SerializedExample.from_json(line))
    return out
