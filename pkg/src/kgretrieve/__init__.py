"""Subgraph retrieval from a DBpedia-style knowledge graph for claim verification."""

from kgretrieve.kgstore import KnowledgeGraph, Triple, load_triples, neighbors_in, neighbors_out
from kgretrieve.retrieval import (
    FallbackPolicy,
    RetrievalStrategy,
    Subgraph,
    SubgraphStats,
    batch_retrieve,
    retrieve,
    retrieve_contextual,
    retrieve_direct,
    retrieve_single_step,
)
from kgretrieve.serialize import canonical_order, claim_with_subgraph, triple_to_string

__version__ = "0.1.0"
