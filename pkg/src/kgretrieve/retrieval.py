"""Non-trainable subgraph retrieval around a claim's entity list.

Three strategies, from narrowest to widest:

* ``DIRECT``: triples whose head and tail are both listed entities.
* ``CONTEXTUAL``: the direct triples plus every triple touching a listed
  entity whose relation name (stemmed) appears among the claim's stems.
* ``SINGLE_STEP``: every triple touching a listed entity.

For any input the three results nest: direct within contextual within
single-step.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

from kgretrieve.kgstore import KnowledgeGraph, Triple
from kgretrieve.serialize import canonical_order
from kgretrieve.textnorm import claim_token_set, relation_matches_claim

if TYPE_CHECKING:
    from kgretrieve.dataset import ClaimRecord

__all__ = [
    "RetrievalStrategy",
    "FallbackPolicy",
    "Subgraph",
    "SubgraphStats",
    "MissingClaim",
    "retrieve_direct",
    "retrieve_contextual",
    "retrieve_single_step",
    "retrieve",
    "batch_retrieve",
]


class RetrievalStrategy(str, enum.Enum):
    DIRECT = "direct"
    CONTEXTUAL = "contextual"
    SINGLE_STEP = "single-step"


class FallbackPolicy(str, enum.Enum):
    KEEP_EMPTY = "keep-empty"
    SINGLE_STEP_ON_EMPTY = "single-step-on-empty"


class MissingClaim(ValueError):
    pass


@dataclass(frozen=True)
class Subgraph:
    triples: tuple[Triple, ...]
    strategy: RetrievalStrategy
    fallback_applied: bool = False

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self):
        return iter(self.triples)

    @property
    def keys(self) -> set[tuple[str, str, str]]:
        return {t.key for t in self.triples}


@dataclass(frozen=True)
class SubgraphStats:
    total: int
    nonempty: int
    nonempty_fraction: float
    size_mean: float
    size_max: int

    @classmethod
    def from_subgraphs(cls, subgraphs: Sequence[Subgraph]) -> "SubgraphStats":
        # a subgraph rescued by the fallback was empty under its own strategy
        total = len(subgraphs)
        nonempty = sum(1 for sg in subgraphs if len(sg) and not sg.fallback_applied)
        sizes = [len(sg) for sg in subgraphs]
        return cls(
            total=total,
            nonempty=nonempty,
            nonempty_fraction=nonempty / total if total else 0.0,
            size_mean=sum(sizes) / total if total else 0.0,
            size_max=max(sizes, default=0),
        )


def _finish(g: KnowledgeGraph, ordinals: Iterable[int], entities, strategy, fallback=False) -> Subgraph:
    triples = canonical_order((g.triple(o) for o in ordinals), entities)
    return Subgraph(tuple(triples), strategy, fallback)


def _direct_ordinals(g: KnowledgeGraph, entities: Sequence[str]) -> set[int]:
    wanted = set(entities)
    found = set()
    for e in wanted:
        for o in g.out_ordinals(e):
            if g.tail_of(o) in wanted:
                found.add(o)
    return found


def _incident_ordinals(g: KnowledgeGraph, entities: Sequence[str]) -> set[int]:
    found = set()
    for e in set(entities):
        found.update(g.out_ordinals(e))
        found.update(g.in_ordinals(e))
    return found


def retrieve_direct(g: KnowledgeGraph, entities: Sequence[str]) -> Subgraph:
    return _finish(g, _direct_ordinals(g, entities), entities, RetrievalStrategy.DIRECT)


def retrieve_contextual(g: KnowledgeGraph, entities: Sequence[str], claim: str) -> Subgraph:
    stems = claim_token_set(claim)
    found = _direct_ordinals(g, entities)
    for o in _incident_ordinals(g, entities):
        if o not in found and relation_matches_claim(g.relation_of(o), stems):
            found.add(o)
    return _finish(g, found, entities, RetrievalStrategy.CONTEXTUAL)


def retrieve_single_step(g: KnowledgeGraph, entities: Sequence[str]) -> Subgraph:
    return _finish(g, _incident_ordinals(g, entities), entities, RetrievalStrategy.SINGLE_STEP)


def retrieve(
    g: KnowledgeGraph,
    entities: Sequence[str],
    claim: str | None = None,
    strategy: RetrievalStrategy = RetrievalStrategy.DIRECT,
    fallback: FallbackPolicy = FallbackPolicy.KEEP_EMPTY,
) -> Subgraph:
    strategy = RetrievalStrategy(strategy)
    fallback = FallbackPolicy(fallback)
    if strategy is RetrievalStrategy.DIRECT:
        sg = retrieve_direct(g, entities)
    elif strategy is RetrievalStrategy.CONTEXTUAL:
        if claim is None:
            raise MissingClaim("contextual retrieval needs the claim text")
        sg = retrieve_contextual(g, entities, claim)
    else:
        sg = retrieve_single_step(g, entities)
    if not sg.triples and fallback is FallbackPolicy.SINGLE_STEP_ON_EMPTY:
        wide = retrieve_single_step(g, entities)
        return Subgraph(wide.triples, strategy, fallback_applied=True)
    return sg


def batch_retrieve(
    g: KnowledgeGraph,
    claims: Sequence["ClaimRecord"],
    strategy: RetrievalStrategy = RetrievalStrategy.DIRECT,
    fallback: FallbackPolicy = FallbackPolicy.KEEP_EMPTY,
    workers: int = 1,
) -> tuple[list[Subgraph], SubgraphStats]:
    """Retrieve one subgraph per claim, in input order.

    ``workers > 1`` fans the claims out over a thread pool; the output is
    identical to the sequential run.
    """

    def one(c: "ClaimRecord") -> Subgraph:
        return retrieve(g, c.entities, c.claim, strategy, fallback)

    if workers > 1 and len(claims) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            subgraphs = list(pool.map(one, claims, chunksize=1))
    else:
        subgraphs = [one(c) for c in claims]
    return subgraphs, SubgraphStats.from_subgraphs(subgraphs)
