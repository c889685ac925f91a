"""Command-line interface: thin wrappers over the library functions.

Subcommands mirror the offline workflow: ingest lesson documents into a
bank, mine triplets, build/cache an index, ask one-off questions, run the
evaluation grids, and serve the HTTP API.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import config as config_mod
from . import corpus, evaluation, retrieval
from .engine import AskRequest, QAEngine
from .providers import HttpEmbeddingClient


def _cmd_ingest(args: argparse.Namespace) -> int:
    raw = Path(args.infile).read_bytes()
    paragraphs = corpus.ingest_lesson(raw, lang=args.lang, lesson=args.lesson)
    existing = corpus.load_bank(args.out).paragraphs if args.append and Path(args.out).exists() else []
    bank = corpus.AnswerBank(existing + paragraphs)
    bank.validate()
    corpus.save_bank(bank, args.out)
    print(f"ingested {len(paragraphs)} paragraphs ({args.lang}, lesson {args.lesson}) -> {args.out}")
    return 0


def _cmd_triplets(args: argparse.Namespace) -> int:
    bank = corpus.load_bank(args.bank)
    triplet_set = corpus.generate_triplets(bank, lang=args.lang, seed=args.seed)
    train, test = corpus.split_triplets(triplet_set, train_fraction=args.split, seed=args.seed)
    corpus.save_triplets(train, args.out_train)
    corpus.save_triplets(test, args.out_test)
    print(
        f"{len(triplet_set.triplets)} triplets -> {len(train.triplets)} train / "
        f"{len(test.triplets)} test (seed {args.seed})"
    )
    return 0


def _cmd_index(args: argparse.Namespace) -> int:
    bank = corpus.load_bank(args.bank)
    digest = retrieval.file_digest(args.bank)
    model = None
    if args.backend == "tfidf":
        model, index = retrieval.build_tfidf_index(bank, args.lang)
    elif args.backend == "hash":
        index = retrieval.build_hash_index(bank, args.lang, dim=args.dim, seed=args.seed)
    elif args.backend == "dense":
        if not args.vectors:
            print("error: --vectors is required for the dense backend", file=sys.stderr)
            return 2
        index = retrieval.load_dense_index(args.vectors, bank, args.lang)
    else:
        print(f"error: unknown backend {args.backend!r}", file=sys.stderr)
        return 2
    index.meta["bank_digest"] = digest
    retrieval.save_index(args.out, index, tfidf_model=model)
    print(f"built {args.backend} index for {args.lang}: {index.n_rows} rows, dim {index.dim} -> {args.out}")
    return 0


def _build_ask_engine(args: argparse.Namespace) -> QAEngine:
    bank = corpus.load_bank(args.bank)
    engine = QAEngine(bank)
    if args.index:
        index, model = retrieval.load_index(args.index, bank_digest=retrieval.file_digest(args.bank))
        if index.backend == "tfidf":
            engine.register_entry(index.lang, "tfidf", _tfidf_entry(index, model))
        elif index.backend == "hash":
            engine.add_hash_index(index.lang, dim=index.meta["dim"], seed=index.meta["seed"])
        else:
            engine.add_dense_index(index.lang, index, _provider_from_args(args).embed_one)
        return engine
    for lang in sorted(bank.languages):
        if args.backend == "tfidf":
            engine.add_tfidf_index(lang)
        elif args.backend == "hash":
            engine.add_hash_index(lang, dim=args.dim, seed=args.seed)
        elif args.backend == "dense":
            vectors = _per_lang_vectors(args).get(lang)
            if not vectors:
                continue
            index = retrieval.load_dense_index(vectors, bank, lang)
            engine.add_dense_index(lang, index, _provider_from_args(args).embed_one)
    return engine


def _tfidf_entry(index, model):
    from .engine import IndexEntry
    from .retrieval import tfidf_vectorize

    return IndexEntry(index=index, vectorize=lambda text: tfidf_vectorize(model, text))


def _provider_from_args(args: argparse.Namespace) -> HttpEmbeddingClient:
    if not args.provider_url:
        raise SystemExit("error: --provider-url is required for dense question embedding")
    return HttpEmbeddingClient(args.provider_url)


def _per_lang_vectors(args: argparse.Namespace) -> dict[str, str]:
    out = {}
    for spec in args.vectors or []:
        lang, _, path = spec.partition("=")
        if not path:
            raise SystemExit(f"error: --vectors expects lang=path, got {spec!r}")
        out[lang] = path
    return out


def _cmd_ask(args: argparse.Namespace) -> int:
    engine = _build_ask_engine(args)
    req = AskRequest(
        question=args.question,
        top_k=args.k,
        lang_override=args.lang,
        threshold=args.threshold,
        backend=args.backend,
    )
    response = engine.ask(req)
    print(f"language: {response.lang_detected}")
    if not response.answered:
        print(f"no answer: {response.message}")
        return 3
    for hit in response.answers:
        refs = f"  [{', '.join(hit.figure_refs)}]" if hit.figure_refs else ""
        print(f"{hit.rank}. ({hit.score:.4f}) {hit.id}{refs}")
        print(f"   {hit.text}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    bank = corpus.load_bank(args.bank)
    engine = QAEngine(bank)
    backends = [b.strip() for b in args.backends.split(",") if b.strip()]
    vectors = _per_lang_vectors(args)
    languages = sorted(bank.languages)
    for lang in languages:
        if "tfidf" in backends:
            engine.add_tfidf_index(lang)
        if "hash" in backends:
            engine.add_hash_index(lang, dim=args.dim, seed=args.seed)
        if "dense" in backends:
            path = vectors.get(lang)
            if not path:
                print(f"error: dense backend requested but no --vectors {lang}=... given", file=sys.stderr)
                return 2
            index = retrieval.load_dense_index(path, bank, lang)
            engine.add_dense_index(lang, index, _provider_from_args(args).embed_one)
    qaset = corpus.load_qa_pairs(args.qa, bank)
    cfg = evaluation.EvalConfig(
        backends=backends,
        languages=languages,
        k_values=[int(k) for k in args.k.split(",")],
        timing_repeats=args.timing_repeats,
        warmup_queries=args.warmup,
    )
    report = evaluation.evaluate(qaset, engine, cfg)
    rendered = evaluation.render_report(report, fmt=args.format)
    if args.out:
        Path(args.out).write_text(rendered, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(rendered, end="")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    config_path = args.config or os.environ.get("KWAME_CONFIG")
    if config_path:
        cfg = config_mod.load_config(config_path)
    else:
        cfg = config_mod.ServiceConfig()
    if args.bank:
        cfg.bank_path = args.bank
    if args.port is not None:
        cfg.port = args.port
    config_mod.apply_env_overrides(cfg)
    serve(cfg)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kwame", description="Bilingual course QA toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="ingest a lesson document into an answer bank")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--lang", required=True, choices=list(corpus.SUPPORTED_LANGUAGES))
    p.add_argument("--lesson", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--append", action="store_true", help="append to an existing bank file")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("triplets", help="mine weak-label triplets with a train/test split")
    p.add_argument("--bank", required=True)
    p.add_argument("--lang", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", type=float, default=0.75)
    p.add_argument("--out-train", required=True)
    p.add_argument("--out-test", required=True)
    p.set_defaults(func=_cmd_triplets)

    p = sub.add_parser("index", help="build and cache a search index")
    p.add_argument("--bank", required=True)
    p.add_argument("--lang", required=True)
    p.add_argument("--backend", required=True, choices=["tfidf", "dense", "hash"])
    p.add_argument("--vectors", help="dense embedding file (dense backend)")
    p.add_argument("--dim", type=int, default=1024)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_index)

    p = sub.add_parser("ask", help="ask one question against a bank")
    p.add_argument("question")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--lang", choices=list(corpus.SUPPORTED_LANGUAGES))
    p.add_argument("--backend", default="tfidf", choices=["tfidf", "dense", "hash"])
    p.add_argument("--threshold", type=float)
    p.add_argument("--bank", required=True)
    p.add_argument("--index", help="cached index file from `kwame index`")
    p.add_argument("--vectors", action="append", help="lang=path dense embedding file (repeatable)")
    p.add_argument("--provider-url", help="embedding provider base URL (dense backend)")
    p.add_argument("--dim", type=int, default=1024)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_ask)

    p = sub.add_parser("eval", help="run the accuracy/duration evaluation grids")
    p.add_argument("--bank", required=True)
    p.add_argument("--qa", required=True)
    p.add_argument("--backends", default="tfidf,hash")
    p.add_argument("--k", default="1,3,5")
    p.add_argument("--format", default="text", choices=["text", "json", "csv"])
    p.add_argument("--out")
    p.add_argument("--vectors", action="append", help="lang=path dense embedding file (repeatable)")
    p.add_argument("--provider-url")
    p.add_argument("--dim", type=int, default=1024)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timing-repeats", type=int, default=3)
    p.add_argument("--warmup", type=int, default=1)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", help="key=value config file (or set KWAME_CONFIG)")
    p.add_argument("--bank", help="bank file override")
    p.add_argument("--port", type=int)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (corpus.CorpusError, retrieval.IndexError_, evaluation.EvaluationError, config_mod.ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
