"""Command-line interface.

    kgretrieve build-index KG.tsv CACHE
    kgretrieve retrieve --kg KG --claims CLAIMS.jsonl --strategy direct --output OUT.jsonl
    kgretrieve stats    --kg KG --claims CLAIMS.jsonl [--tsv OUT.tsv] [--figure OUT.png]
    kgretrieve prompt   --claims CLAIMS.jsonl --chunk-size 25 --output DIR
    kgretrieve parse    ANSWER.txt [--ids prompt_0001.ids.json] [--expected N] [--output OUT.jsonl]
    kgretrieve eval     --preds PREDS.jsonl --claims CLAIMS.jsonl [--json OUT.json] [--tsv OUT.tsv] [--figure OUT.png]

Run options can also come from a JSON file (``--config run.json``) whose
keys are the ``RunConfig`` field names; flags given on the command line win.
Payloads go to stdout or files, diagnostics and timings to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from kgretrieve import embed, llmprompt, metrics, serialize
from kgretrieve._io import atomic_write
from kgretrieve.dataset import SPLITS, ClaimRecord, load_claims
from kgretrieve.kgstore import load_triples, read_graph, save_index
from kgretrieve.retrieval import FallbackPolicy, RetrievalStrategy, SubgraphStats, batch_retrieve


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    kg_path: str | None = None
    claims_path: str | None = None
    strategy: RetrievalStrategy = RetrievalStrategy.DIRECT
    fallback: FallbackPolicy = FallbackPolicy.KEEP_EMPTY
    output_path: str | None = None
    split: list[str] = field(default_factory=list)
    chunk_size: int | None = None
    embeddings_path: str | None = None
    workers: int = 1

    @classmethod
    def from_sources(cls, config_path: str | None, overrides: dict) -> "RunConfig":
        values: dict = {}
        if config_path:
            with open(config_path, encoding="utf-8") as fh:
                values = json.load(fh)
            if not isinstance(values, dict):
                raise UsageError(f"{config_path}: config must be a JSON object")
            unknown = set(values) - {f.name for f in dataclasses.fields(cls)}
            if unknown:
                raise UsageError(f"{config_path}: unknown key(s) {', '.join(sorted(unknown))}")
        values.update({k: v for k, v in overrides.items() if v is not None and v != []})
        cfg = cls(**values)
        cfg.strategy = RetrievalStrategy(cfg.strategy)
        cfg.fallback = FallbackPolicy(cfg.fallback)
        if isinstance(cfg.split, str):
            cfg.split = [cfg.split]
        for s in cfg.split:
            if s not in SPLITS:
                raise UsageError(f"unknown split {s!r}")
        if cfg.chunk_size is not None and cfg.chunk_size < 1:
            raise llmprompt.InvalidChunkSize(f"chunk size must be >= 1, got {cfg.chunk_size}")
        return cfg

    def require(self, *names: str) -> None:
        missing = [n for n in names if not getattr(self, n)]
        if missing:
            flags = ", ".join("--" + n.removesuffix("_path").replace("_", "-") for n in missing)
            raise UsageError(f"missing required option(s): {flags}")


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def _read_claims(path: str, splits: Sequence[str] = ()) -> list[ClaimRecord]:
    with open(path, "rb") as fh:
        claims = load_claims(fh)
    if splits:
        claims = [c for c in claims if c.split in splits]
    return claims


def _stats_rows(stats: dict[str, SubgraphStats]) -> str:
    lines = ["strategy\ttotal\tnonempty\tnonempty_fraction\tsize_mean\tsize_max"]
    for name, s in stats.items():
        lines.append(f"{name}\t{s.total}\t{s.nonempty}\t{s.nonempty_fraction:.4f}\t{s.size_mean:.4f}\t{s.size_max}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_build_index(args) -> int:
    t0 = time.perf_counter()
    with open(args.kg, "rb") as fh:
        g = load_triples(fh)
    save_index(g, args.cache)
    print(f"triples\t{len(g)}")
    print(f"entities\t{len(g.entities)}")
    _info(f"index built in {time.perf_counter() - t0:.2f}s -> {args.cache}")
    return 0


def _run_config(args) -> RunConfig:
    overrides = {
        "kg_path": getattr(args, "kg", None),
        "claims_path": getattr(args, "claims", None),
        "strategy": getattr(args, "strategy", None),
        "fallback": getattr(args, "fallback", None),
        "output_path": getattr(args, "output", None),
        "split": getattr(args, "split", None),
        "chunk_size": getattr(args, "chunk_size", None),
        "embeddings_path": getattr(args, "embeddings", None),
        "workers": getattr(args, "workers", None),
    }
    return RunConfig.from_sources(args.config, overrides)


def cmd_retrieve(args) -> int:
    cfg = _run_config(args)
    cfg.require("kg_path", "claims_path", "output_path")
    g = read_graph(cfg.kg_path)
    claims = _read_claims(cfg.claims_path, cfg.split)
    t0 = time.perf_counter()
    subgraphs, stats = batch_retrieve(g, claims, cfg.strategy, cfg.fallback, workers=cfg.workers)
    elapsed = time.perf_counter() - t0
    with atomic_write(cfg.output_path, "w") as fh:
        n = serialize.emit_examples(claims, subgraphs, fh)
    if cfg.embeddings_path:
        with open(cfg.embeddings_path, "rb") as fh:
            table = embed.load_table(fh)
        with atomic_write(cfg.output_path + ".relevance.jsonl", "w") as fh:
            for c, sg in zip(claims, subgraphs):
                nodes = list(dict.fromkeys(x for t in sg for x in (t.head, t.tail)))
                scores = embed.relevance_scores(table[c.claim], nodes, table) if nodes else []
                fh.write(json.dumps({"id": c.id, "nodes": nodes, "scores": scores}, ensure_ascii=False) + "\n")
    sys.stdout.write(_stats_rows({cfg.strategy.value: stats}))
    _info(f"{n} records -> {cfg.output_path}; retrieval took {elapsed:.2f}s")
    return 0


def cmd_stats(args) -> int:
    cfg = _run_config(args)
    cfg.require("kg_path", "claims_path")
    g = read_graph(cfg.kg_path)
    claims = _read_claims(cfg.claims_path, cfg.split)
    strategies = [RetrievalStrategy(s) for s in args.strategies] if args.strategies else list(RetrievalStrategy)
    stats: dict[str, SubgraphStats] = {}
    sizes: dict[str, list[int]] = {}
    for s in strategies:
        t0 = time.perf_counter()
        sgs, st = batch_retrieve(g, claims, s, cfg.fallback, workers=cfg.workers)
        _info(f"{s.value}: {time.perf_counter() - t0:.2f}s")
        stats[s.value] = st
        sizes[s.value] = [len(sg) for sg in sgs]
    table = _stats_rows(stats)
    sys.stdout.write(table)
    if args.tsv:
        with atomic_write(args.tsv, "w") as fh:
            fh.write(table)
    if args.figure:
        from kgretrieve.plotting import plot_subgraph_sizes

        plot_subgraph_sizes(sizes, args.figure, {k: v.nonempty_fraction for k, v in stats.items()})
        _info(f"figure -> {args.figure}")
    return 0


def cmd_prompt(args) -> int:
    cfg = _run_config(args)
    cfg.require("claims_path", "output_path")
    claims = _read_claims(cfg.claims_path, cfg.split)
    batches = llmprompt.chunk_claims(claims, cfg.chunk_size or 25)
    out = Path(cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)
    for k, batch in enumerate(batches, start=1):
        stem = out / f"prompt_{k:04d}"
        with atomic_write(stem.with_suffix(".txt"), "w") as fh:
            fh.write(llmprompt.build_prompt(batch))
        with atomic_write(stem.with_suffix(".ids.json"), "w") as fh:
            fh.write(json.dumps([c.id for c in batch], ensure_ascii=False) + "\n")
    print(f"prompts\t{len(batches)}")
    print(f"claims\t{len(claims)}")
    return 0


def cmd_parse(args) -> int:
    with open(args.answers, encoding="utf-8") as fh:
        text = fh.read()
    ids = None
    if args.ids:
        with open(args.ids, encoding="utf-8") as fh:
            ids = json.load(fh)
    expected = args.expected if args.expected is not None else (len(ids) if ids is not None else None)
    if expected is None:
        raise UsageError("give --expected or --ids")
    answers = llmprompt.parse_response(text, expected)
    if args.output:
        with atomic_write(args.output, "w") as fh:
            llmprompt.write_answers(answers, fh, ids)
    else:
        llmprompt.write_answers(answers, sys.stdout, ids)
    _info(f"{len(answers)} answers parsed")
    return 0


def _align_predictions(records: list[dict], claims: list[ClaimRecord]) -> list[bool]:
    for r in records:
        if not isinstance(r.get("verdict"), bool):
            raise UsageError(f"prediction record without boolean 'verdict': {r!r}")
    if records and all("id" in r for r in records):
        by_id = {}
        for r in records:
            if r["id"] in by_id:
                raise UsageError(f"duplicate prediction for claim {r['id']!r}")
            by_id[r["id"]] = r["verdict"]
        missing = [c.id for c in claims if c.id not in by_id]
        if missing or len(by_id) != len(claims):
            raise metrics.LengthMismatch(len(by_id), len(claims))
        return [by_id[c.id] for c in claims]
    if len(records) != len(claims):
        raise metrics.LengthMismatch(len(records), len(claims))
    return [r["verdict"] for r in records]


def cmd_eval(args) -> int:
    with open(args.preds, encoding="utf-8") as fh:
        records = llmprompt.read_answers(fh)
    claims = _read_claims(args.claims, args.split or ())
    preds = _align_predictions(records, claims)
    rep = metrics.report(preds, claims)
    sys.stdout.write(rep.render())
    if args.json:
        with atomic_write(args.json, "w") as fh:
            fh.write(rep.to_json())
    if args.tsv:
        with atomic_write(args.tsv, "w") as fh:
            fh.write(rep.to_tsv())
    if args.figure:
        from kgretrieve.plotting import plot_type_scores

        plot_type_scores(rep, args.figure)
        _info(f"figure -> {args.figure}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_run_flags(p: argparse.ArgumentParser, *, kg: bool = True, output: bool = True) -> None:
    p.add_argument("--config", help="JSON file with RunConfig keys")
    if kg:
        p.add_argument("--kg", help="TSV triple dump or index cache")
    p.add_argument("--claims", help="claim file (JSON Lines)")
    p.add_argument("--split", action="append", choices=SPLITS, help="keep only this split (repeatable)")
    if output:
        p.add_argument("--output", "-o")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kgretrieve", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-index", help="load a triple dump and write an index cache")
    p.add_argument("kg")
    p.add_argument("cache")
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("retrieve", help="retrieve subgraphs and write serialized examples")
    _add_run_flags(p)
    p.add_argument("--strategy", choices=[s.value for s in RetrievalStrategy])
    p.add_argument("--fallback", choices=[f.value for f in FallbackPolicy])
    p.add_argument("--embeddings", help="embedding table; writes OUTPUT.relevance.jsonl")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("stats", help="non-empty fraction and size statistics per strategy")
    _add_run_flags(p, output=False)
    p.add_argument("--strategy", dest="strategies", action="append", choices=[s.value for s in RetrievalStrategy])
    p.add_argument("--fallback", choices=[f.value for f in FallbackPolicy])
    p.add_argument("--workers", type=int)
    p.add_argument("--tsv", help="also write the table to this file")
    p.add_argument("--figure", help="size histogram (png/svg/pdf)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("prompt", help="write one prompt file per claim chunk")
    _add_run_flags(p, kg=False)
    p.add_argument("--chunk-size", type=int)
    p.set_defaults(func=cmd_prompt)

    p = sub.add_parser("parse", help="parse a model reply into answer records")
    p.add_argument("answers")
    p.add_argument("--expected", type=int)
    p.add_argument("--ids", help="claim-id manifest written by 'prompt'")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("eval", help="accuracy / P / R / F1 per reasoning type")
    p.add_argument("--preds", required=True, help="JSON Lines with 'verdict' (and 'id')")
    p.add_argument("--claims", required=True)
    p.add_argument("--split", action="append", choices=SPLITS)
    p.add_argument("--json", help="machine-readable report")
    p.add_argument("--tsv", help="tab-separated table")
    p.add_argument("--figure", help="bar chart (png/svg/pdf)")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        _info(f"error: {type(exc).__name__}: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
