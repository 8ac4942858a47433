"""Accuracy / precision / recall / F1, overall and per reasoning type.

The positive class is "supported" (label ``True``). A claim tagged with
several reasoning types is scored in each of those columns and once in
the total, so the per-type confusions need not add up to the total.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence

from kgretrieve.dataset import REASONING_TYPES, ClaimRecord

__all__ = [
    "Confusion",
    "Rates",
    "MetricsReport",
    "LengthMismatch",
    "EmptyConfusion",
    "MissingLabel",
    "COLUMN_TITLES",
    "confusion",
    "rates",
    "report",
]

COLUMN_TITLES = {
    "one-hop": "One-hop",
    "conjunction": "Conjunction",
    "existence": "Existence",
    "multi-hop": "Multi-hop",
    "negation": "Negation",
}


class LengthMismatch(ValueError):
    def __init__(self, left: int, right: int):
        self.left, self.right = left, right
        super().__init__(f"{left} predictions for {right} gold labels")


class EmptyConfusion(ValueError):
    pass


class MissingLabel(ValueError):
    pass


@dataclass(frozen=True)
class Confusion:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other: "Confusion") -> "Confusion":
        return Confusion(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn)


class Rates(NamedTuple):
    accuracy: float
    precision: float
    recall: float
    f1: float


def confusion(preds: Sequence[bool], gold: Sequence[bool]) -> Confusion:
    if len(preds) != len(gold):
        raise LengthMismatch(len(preds), len(gold))
    tp = fp = fn = tn = 0
    for p, g in zip(preds, gold):
        if p and g:
            tp += 1
        elif p:
            fp += 1
        elif g:
            fn += 1
        else:
            tn += 1
    return Confusion(tp, fp, fn, tn)


def rates(c: Confusion) -> Rates:
    """Zero denominators give 0 for precision, recall and F1."""
    if c.n == 0:
        raise EmptyConfusion("no scored claims")
    accuracy = (c.tp + c.tn) / c.n
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return Rates(accuracy, precision, recall, f1)


@dataclass(frozen=True)
class MetricsReport:
    per_type: dict[str, tuple[Rates, Confusion] | None]
    total: tuple[Rates, Confusion] | None

    def columns(self) -> list[tuple[str, tuple[Rates, Confusion] | None]]:
        return [(COLUMN_TITLES[t], self.per_type.get(t)) for t in REASONING_TYPES] + [("Total", self.total)]

    def to_dict(self) -> dict:
        def cell(entry):
            if entry is None:
                return None
            r, c = entry
            return {**r._asdict(), "confusion": asdict(c), "n": c.n}

        return {
            "per_type": {t: cell(self.per_type.get(t)) for t in REASONING_TYPES},
            "total": cell(self.total),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    def rows(self) -> list[list[str]]:
        """Header plus one row per metric, percentages to two decimals."""
        cols = self.columns()
        out = [["Metric"] + [name for name, _ in cols]]
        for i, metric in enumerate(("Accuracy", "Precision", "Recall", "F1")):
            out.append([metric] + ["-" if e is None else f"{100 * e[0][i]:.2f}" for _, e in cols])
        out.append(["N"] + ["0" if e is None else str(e[1].n) for _, e in cols])
        return out

    def to_tsv(self) -> str:
        return "".join("\t".join(r) + "\n" for r in self.rows())

    def render(self) -> str:
        rows = self.rows()
        widths = [max(len(r[j]) for r in rows) for j in range(len(rows[0]))]
        lines = []
        for k, r in enumerate(rows):
            cells = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
            lines.append("  ".join(cells).rstrip())
            if k == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"


def report(preds: Sequence[bool], claims: Sequence[ClaimRecord]) -> MetricsReport:
    if len(preds) != len(claims):
        raise LengthMismatch(len(preds), len(claims))
    for c in claims:
        if c.label is None:
            raise MissingLabel(f"claim {c.id} has no gold label")
    gold = [c.label for c in claims]

    def entry(idx: list[int]):
        if not idx:
            return None
        c = confusion([preds[i] for i in idx], [gold[i] for i in idx])
        return rates(c), c

    per_type = {t: entry([i for i, c in enumerate(claims) if t in c.types]) for t in REASONING_TYPES}
    return MetricsReport(per_type=per_type, total=entry(list(range(len(claims)))))
