"""Acceptance criteria, one test per criterion.

Every test records a PASS / FAIL / SKIP line in ``RESULTS``; the
``pytest_terminal_summary`` hook in conftest prints them after the run.
"""

from __future__ import annotations

import io
import math
import os
import random
import re
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest
from _pytest.outcomes import Skipped

from conftest import oracle_contextual, oracle_direct, oracle_single_step, tsv, unique
from kgretrieve.dataset import REASONING_TYPES, ClaimRecord, load_claims
from kgretrieve.embed import cosine, scale_node_features
from kgretrieve.kgstore import load_triples, read_graph
from kgretrieve.llmprompt import (
    AnswerCountMismatch,
    DuplicateNumber,
    LlmAnswer,
    ResponseSyntaxError,
    VerdictNotBoolean,
    parse_response,
    render_answers,
)
from kgretrieve.metrics import Confusion, rates, report
from kgretrieve.retrieval import (
    FallbackPolicy,
    RetrievalStrategy,
    batch_retrieve,
    retrieve,
    retrieve_contextual,
    retrieve_direct,
    retrieve_single_step,
)
from kgretrieve.serialize import emit_examples, read_examples
from kgretrieve.synth import large_dump, random_claim, random_claims, random_triples

RESULTS: dict[int, tuple[str, str, str]] = {}


@contextmanager
def criterion(n: int, title: str):
    state = {"detail": ""}
    try:
        yield state
    except Skipped as e:
        RESULTS[n] = ("SKIP", title, str(e))
        raise
    except BaseException as e:
        RESULTS[n] = ("FAIL", title, f"{type(e).__name__}: {e}".splitlines()[0][:200])
        raise
    RESULTS[n] = ("PASS", title, state["detail"])


def _cases(seed=1234, n_graphs=200, per_graph=5):
    """Random graphs (<=1000 triples, with duplicates) and entity lists of 0-6 entities."""
    rng = random.Random(seed)
    for _ in range(n_graphs):
        raw = random_triples(rng, rng.randint(0, 1000), rng.randint(3, 300), n_relations=rng.randint(1, 16), dup_rate=0.05)
        g = load_triples(tsv(raw))
        triples = unique(raw)
        pool = sorted(g.entities) + ["E_absent", "lit:none"]
        for _ in range(per_graph):
            k = rng.randint(0, 6)
            ents = [rng.choice(pool) for _ in range(k)]
            yield g, triples, ents, random_claim(rng, rng.randint(0, 12))


def test_c1_c2_c3_retrieval_oracles():
    cases = list(_cases())
    keys = lambda sg: [t.key for t in sg]  # noqa: E731
    with criterion(1, "retrieval equals brute-force definitions (200 graphs)") as c1:
        start = time.perf_counter()
        results = []
        for g, triples, ents, claim in cases:
            d, cx, s = retrieve_direct(g, ents), retrieve_contextual(g, ents, claim), retrieve_single_step(g, ents)
            for sg in (d, cx, s):
                assert len(set(keys(sg))) == len(sg)
            assert set(keys(d)) == oracle_direct(triples, ents)
            assert set(keys(cx)) == oracle_contextual(triples, ents, claim)
            assert set(keys(s)) == oracle_single_step(triples, ents)
            results.append((d, cx, s))
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0, f"took {elapsed:.1f}s"
        c1["detail"] = f"{len(cases)} cases in {elapsed:.2f}s"

    with criterion(2, "nesting direct <= contextual <= single-step") as c2:
        for d, cx, s in results:
            assert d.keys <= cx.keys <= s.keys
        c2["detail"] = f"{len(results)} cases"

    with criterion(3, "fallback substitutes single-step on empty") as c3:
        fired = 0
        for (g, triples, ents, claim), (d, cx, s) in zip(cases, results):
            for strat, primary in ((RetrievalStrategy.DIRECT, d), (RetrievalStrategy.CONTEXTUAL, cx), (RetrievalStrategy.SINGLE_STEP, s)):
                got = retrieve(g, ents, claim, strat, FallbackPolicy.SINGLE_STEP_ON_EMPTY)
                kept = retrieve(g, ents, claim, strat, FallbackPolicy.KEEP_EMPTY)
                assert kept.triples == primary.triples and not kept.fallback_applied
                if len(primary) == 0 and len(s) > 0:
                    fired += 1
                    assert got.triples == s.triples and got.fallback_applied
                    assert got.keys == oracle_single_step(triples, ents)
                elif len(primary) == 0:
                    # single-step itself is empty; substitution yields the same empty result
                    assert len(got) == 0
                else:
                    assert got.triples == primary.triples and not got.fallback_applied
        assert fired > 0
        c3["detail"] = f"fallback fired {fired} times"


def test_c4_dataset_statistics():
    with criterion(4, "real-dataset non-empty fractions (49.0% / 62.5%)") as c4:
        kg_path, claims_path = os.environ.get("KGRETRIEVE_KG"), os.environ.get("KGRETRIEVE_CLAIMS")
        if not (kg_path and claims_path):
            pytest.skip("dataset unavailable; set KGRETRIEVE_KG and KGRETRIEVE_CLAIMS (criteria 1-3 stand in)")
        g = read_graph(kg_path)
        with open(claims_path, "rb") as fh:
            claims = [c for c in load_claims(fh) if c.split in ("train", "validation")]
        _, direct = batch_retrieve(g, claims, RetrievalStrategy.DIRECT)
        _, ctx = batch_retrieve(g, claims, RetrievalStrategy.CONTEXTUAL)
        assert abs(direct.nonempty_fraction - 0.490) <= 0.005, direct.nonempty_fraction
        assert abs(ctx.nonempty_fraction - 0.625) <= 0.020, ctx.nonempty_fraction
        c4["detail"] = f"direct {direct.nonempty_fraction:.2%}, contextual {ctx.nonempty_fraction:.2%}"


@pytest.mark.slow
def test_c5_throughput():
    with criterion(5, "throughput: 1M-triple build < 60s, 10k single-step claims < 90s") as c5:
        n_entities = 100_000
        t0 = time.perf_counter()
        g = load_triples(large_dump(1_000_000, n_entities, seed=7))
        build = time.perf_counter() - t0
        assert len(g) > 990_000
        rng = random.Random(7)
        claims = [
            ClaimRecord(f"c{i}", "claim", tuple(f"E{rng.randrange(n_entities)}" for _ in range(4)), None, frozenset({"one-hop"}), "train")
            for i in range(10_000)
        ]
        t1 = time.perf_counter()
        subgraphs, stats = batch_retrieve(g, claims, RetrievalStrategy.SINGLE_STEP)
        run = time.perf_counter() - t1
        assert len(subgraphs) == 10_000 and stats.total == 10_000
        # spot check against a scan of the column store
        for sg, claim in list(zip(subgraphs, claims))[:3]:
            es = set(claim.entities)
            expect = {t.key for t in g if t.head in es or t.tail in es}
            assert sg.keys == expect
        assert build < 60.0, f"build {build:.1f}s"
        assert run < 90.0, f"retrieval {run:.1f}s"
        c5["detail"] = f"build {build:.1f}s, retrieval {run:.1f}s"


_GROUP = re.compile(r"\[([^\[\]]*)\]")


def test_c6_serialization():
    with criterion(6, "serialization deterministic, one separator, canonical order (1000 subgraphs)") as c6:
        rng = random.Random(99)
        checked = nonempty = 0
        while checked < 1000:
            raw = random_triples(rng, rng.randint(0, 300), rng.randint(3, 60), dup_rate=0.05)
            g = load_triples(tsv(raw))
            ents = sorted(g.entities) or ["E0"]
            claims = random_claims(rng, 10, ents, k=rng.randint(1, 6))
            strat = rng.choice(list(RetrievalStrategy))
            sgs, _ = batch_retrieve(g, claims, strat)
            runs = []
            for _ in range(2):
                buf = io.BytesIO()
                emit_examples(claims, sgs, buf)
                runs.append(buf.getvalue())
            assert runs[0] == runs[1]
            ordinal = {t.key: t.ordinal for t in g}
            for claim, sg, ex in zip(claims, sgs, read_examples(runs[0].splitlines())):
                checked += 1
                if len(sg) == 0:
                    assert ex.text == claim.claim
                    continue
                nonempty += 1
                assert ex.text.count(" | ") == 1
                head, body = ex.text.split(" | ")
                assert head == claim.claim
                groups = [tuple(x.split(", ")) for x in _GROUP.findall(body)]
                assert " ".join(f"[{', '.join(x)}]" for x in groups) == body
                assert set(groups) == sg.keys
                first = {}
                for i, e in enumerate(claim.entities):
                    first.setdefault(e, i)
                rank = lambda t: (min(first.get(t[0], len(claim.entities)), first.get(t[2], len(claim.entities))), ordinal[t])  # noqa: E731
                assert groups == sorted(groups, key=rank)
        c6["detail"] = f"{checked} examples, {nonempty} non-empty"


def _ref_cosine(u, v):
    dot = math.fsum(a * b for a, b in zip(u, v))
    return dot / (math.sqrt(math.fsum(a * a for a in u)) * math.sqrt(math.fsum(b * b for b in v)))


def test_c7_numeric():
    with criterion(7, "cosine and feature scaling") as c7:
        assert abs(cosine([3.0, -1.0, 2.0], [3.0, -1.0, 2.0]) - 1.0) <= 1e-9
        assert abs(cosine([1.0, 0.0, 0.0], [0.0, 5.0, 0.0])) <= 1e-9
        assert abs(cosine([1.0, 0.0], [1.0, 1.0]) - 1 / math.sqrt(2)) <= 1e-9
        assert abs(cosine([1.0, 2.0], [-2.0, -4.0]) + 1.0) <= 1e-9
        assert abs(cosine([1.0, 2.0, 3.0], [4.0, 5.0, 6.0]) - 32 / math.sqrt(14 * 77)) <= 1e-9
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            dim = int(rng.integers(2, 64))
            u, v = rng.normal(size=dim) * rng.uniform(0.01, 100), rng.normal(size=dim)
            a = float(10 ** rng.uniform(-3, 3))
            c = cosine(u, v)
            assert abs(c - cosine(v, u)) <= 1e-9
            assert abs(cosine(a * u, v) - c) <= 1e-9
            assert abs(cosine(u, a * v) - c) <= 1e-9
            assert abs(c - _ref_cosine(u.tolist(), v.tolist())) <= 1e-9
            assert abs(cosine(u, u) - 1.0) <= 1e-9
            w = v - (v @ u) / (u @ u) * u
            assert abs(cosine(u, w)) <= 1e-9
        x = np.array([[2.0, 4.0, -1.0], [1.0, 1.0, 1.0], [0.5, 0.0, 3.0]])
        assert np.array_equal(scale_node_features(x, [0.5, 2.0, 1.0]), [[1.0, 2.0, -0.5], [2.0, 2.0, 2.0], [0.5, 0.0, 3.0]])
        assert np.array_equal(scale_node_features(x, [0.0, 0.0, 0.0]), np.zeros((3, 3)))
        assert np.array_equal(scale_node_features(x, [-1.0, 1.0, 1.0])[0], [-2.0, -4.0, 1.0])
        c7["detail"] = "1000 random pairs, tolerance 1e-9"


def test_c8_metrics():
    with criterion(8, "metric rates exact, table layout (model scores such as 93.49 not reproducible)") as c8:
        hand = [Confusion(2, 1, 1, 1), Confusion(7, 0, 3, 5), Confusion(0, 4, 0, 6), Confusion(13, 2, 5, 11), Confusion(1, 0, 0, 0)]
        for cm in hand:
            n = cm.tp + cm.fp + cm.fn + cm.tn
            acc = Fraction(cm.tp + cm.tn, n)
            p = Fraction(cm.tp, cm.tp + cm.fp) if cm.tp + cm.fp else Fraction(0)
            r = Fraction(cm.tp, cm.tp + cm.fn) if cm.tp + cm.fn else Fraction(0)
            f = 2 * p * r / (p + r) if p + r else Fraction(0)
            got = rates(cm)
            for x, y in ((got.accuracy, acc), (got.precision, p), (got.recall, r), (got.f1, f)):
                assert abs(x - float(y)) <= 1e-12
        claims = [ClaimRecord(str(i), f"c{i}", ("E",), i % 2 == 0, frozenset({t}), "test") for i, t in enumerate(REASONING_TYPES * 4)]
        preds = [c.label if i % 3 else not c.label for i, c in enumerate(claims)]
        rep = report(preds, claims)
        assert rep.rows()[0] == ["Metric", "One-hop", "Conjunction", "Existence", "Multi-hop", "Negation", "Total"]
        total = sum(p == c.label for p, c in zip(preds, claims)) / len(claims)
        assert abs(rep.total[0].accuracy - total) <= 1e-12
        c8["detail"] = "5 hand confusions; trained-model accuracies are out of scope"


_ALPHABET = "abcXYZ 019\"\\'()[],.\t\u00e9\u00fc\u4e2d\U0001f600"


def test_c9_prompt_round_trip():
    with criterion(9, "answer render/parse round trip (500 sequences) and error cases") as c9:
        rng = random.Random(9)
        for _ in range(500):
            n = rng.randint(0, 30)
            nums = list(range(1, n + 1))
            rng.shuffle(nums)
            answers = [LlmAnswer(k, rng.random() < 0.5, "".join(rng.choice(_ALPHABET) for _ in range(rng.randint(0, 40)))) for k in nums]
            assert parse_response(render_answers(answers), n) == answers
        good = render_answers([LlmAnswer(1, True, "a"), LlmAnswer(2, False, "b")])
        with pytest.raises(AnswerCountMismatch):
            parse_response(good, 3)
        with pytest.raises(DuplicateNumber):
            parse_response('[(1, True, "a"), (1, False, "b")]', 2)
        with pytest.raises(VerdictNotBoolean):
            parse_response('[(1, yes, "a")]', 1)
        for bad in ("", "[(1, True, 'a')]", '[(1, True, "a")', '[(1, True "a")]', '[(1, True, "a")] extra', "{}"):
            with pytest.raises(ResponseSyntaxError):
                parse_response(bad, 1)
        c9["detail"] = "500 sequences"
