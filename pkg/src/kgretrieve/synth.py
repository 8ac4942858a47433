"""Synthetic graphs and claims for property tests and throughput runs."""

from __future__ import annotations

import random
from typing import Iterator

import numpy as np

from kgretrieve.dataset import REASONING_TYPES, ClaimRecord

# relation parts paired with claim words that stem onto them
WORDS = {
    "location": "located",
    "birth": "born",
    "place": "places",
    "founded": "founding",
    "by": "by",
    "country": "country",
    "top": "top",
    "manager": "managed",
    "author": "authored",
    "genre": "genres",
    "language": "languages",
    "capital": "capital",
    "leader": "leading",
    "area": "areas",
    "club": "clubs",
    "date": "dated",
    "completion": "completed",
    "operator": "operated",
}
_PARTS = sorted(WORDS)


def relation_name(rng: random.Random) -> str:
    k = rng.choice((1, 1, 2, 2, 3))
    parts = [rng.choice(_PARTS) for _ in range(k)]
    name = parts[0] + "".join(p.capitalize() for p in parts[1:])
    return "~" + name if rng.random() < 0.05 else name


def random_triples(rng: random.Random, n_triples: int, n_entities: int, n_relations: int = 12, dup_rate: float = 0.0):
    ents = [f"E{i}" for i in range(n_entities)]
    rels = sorted({relation_name(rng) for _ in range(n_relations * 3)})[:n_relations] or ["location"]
    out = []
    for _ in range(n_triples):
        if out and rng.random() < dup_rate:
            out.append(rng.choice(out))
            continue
        h = rng.choice(ents)
        # self-loops stay possible on purpose
        t = rng.choice(ents) if rng.random() < 0.9 else f"lit:{rng.randint(0, 3000)}"
        out.append((h, rng.choice(rels), t))
    return out


def random_claim(rng: random.Random, n_words: int = 8) -> str:
    pool = list(WORDS.values()) + ["the", "is", "in", "a", "and", "was", "not", "of"]
    words = [rng.choice(pool) for _ in range(n_words)]
    if words:
        words[0] = words[0].capitalize()
    return " ".join(words) + "."


def random_claims(rng: random.Random, n: int, entities: list[str], k: int = 4) -> list[ClaimRecord]:
    out = []
    for i in range(n):
        ents = tuple(rng.sample(entities, min(k, len(entities)))) if entities else ()
        out.append(
            ClaimRecord(
                id=f"c{i}",
                claim=random_claim(rng),
                entities=ents,
                label=rng.random() < 0.5,
                types=frozenset(rng.sample(REASONING_TYPES, rng.choice((1, 1, 2)))),
                split="train",
            )
        )
    return out


def large_dump(n_triples: int, n_entities: int, n_relations: int = 64, seed: int = 0) -> Iterator[bytes]:
    """Stream a big TAB-separated dump as encoded lines (no Python objects per triple kept)."""
    gen = np.random.default_rng(seed)
    rng = random.Random(seed)
    rels = [relation_name(rng) + str(i) for i in range(n_relations)]
    chunk = 100_000
    for start in range(0, n_triples, chunk):
        m = min(chunk, n_triples - start)
        heads = gen.integers(0, n_entities, m)
        tails = gen.integers(0, n_entities, m)
        rel_ix = gen.integers(0, n_relations, m)
        for h, r, t in zip(heads.tolist(), rel_ix.tolist(), tails.tolist()):
            yield f"E{h}\t{rels[r]}\tE{t}\n".encode()
