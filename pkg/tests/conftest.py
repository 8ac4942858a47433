"""Brute-force oracles shared by the test modules.

None of these touch the adjacency index or the package's own stemmer:
relation matching is re-derived with NLTK's Porter implementation in
original-algorithm mode and ASCII regex splitting.
"""

from __future__ import annotations

import io
import re

import pytest
from nltk.stem.porter import PorterStemmer

_porter = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


def oracle_stem(token: str) -> str:
    # Porter's reference implementation leaves words of <= 2 letters alone
    return token if len(token) <= 2 else _porter.stem(token)


def oracle_claim_stems(claim: str) -> set[str]:
    return {oracle_stem(t) for t in re.split(r"[^0-9a-z]+", claim.lower()) if t}


def oracle_relation_tokens(relation: str) -> list[str]:
    relation = relation.lstrip("~")
    return [t.lower() for t in re.findall(r"[A-Z]+(?![a-z])|[A-Z]?[a-z]+|\d+", relation)]


def oracle_relation_match(relation: str, claim: str) -> bool:
    toks = oracle_relation_tokens(relation)
    stems = oracle_claim_stems(claim)
    return bool(toks) and all(oracle_stem(t) in stems for t in toks)


def unique(triples):
    return list(dict.fromkeys(triples))


def oracle_direct(triples, entities) -> set:
    es = set(entities)
    return {t for t in triples if t[0] in es and t[2] in es}


def oracle_single_step(triples, entities) -> set:
    es = set(entities)
    return {t for t in triples if t[0] in es or t[2] in es}


def oracle_contextual(triples, entities, claim) -> set:
    es = set(entities)
    extra = {t for t in triples if (t[0] in es or t[2] in es) and oracle_relation_match(t[1], claim)}
    return oracle_direct(triples, entities) | extra


def tsv(triples) -> io.BytesIO:
    return io.BytesIO("".join(f"{h}\t{r}\t{t}\n" for h, r, t in triples).encode("utf-8"))


@pytest.fixture
def meyer_graph():
    from kgretrieve.kgstore import load_triples

    return load_triples(tsv([("Meyer_Werft", "location", "Papenburg"), ("Papenburg", "country", "Germany")]))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        status, title, detail = results[n]
        line = f"criterion {n}: {status}  {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
