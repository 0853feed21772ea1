"""Command-line entry points.

Subcommands: ingest, index, index-info, suggest, intro, eval-retrieval,
eval-intro, serve. Failures exit nonzero with one machine-parseable line:
``error: <class>: <detail>``.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import sys
from pathlib import Path

from ..corpus.language import TrigramLanguageDetector
from ..corpus.works import FilterPolicy, IngestReport, filter_works, load_works, write_works
from ..evalharness.introeval import run_intro_eval
from ..evalharness.reporting import (
    format_intro_table,
    format_retrieval_table,
    write_intro_report,
    write_retrieval_report,
)
from ..evalharness.retrieval import (
    BUILTIN_RANKERS,
    STRATEGIES,
    build_eval_set,
    make_pairwise_ranker,
    make_score_ranker,
    run_retrieval_eval,
)
from ..introgen.chain import ChainStageError, RecencyPolicy, run_intro_chain
from ..providers.base import ProviderError
from ..providers.templating import load_templates
from ..providers.mocks import HashEmbedder
from ..recommend.pipeline import SuggestConfig, SuggestStageError, serialize_batch, suggest
from ..vectorindex.hnsw import HnswParams
from ..vectorindex.index import build_index, embed_works
from ..vectorindex.storage import load_index, save_index
from .config import ConfigError, ServiceConfig, load_config
from .runtime import build_providers, build_runtime, parse_bib_works, resolve_references


class CliError(Exception):
    def __init__(self, error_class: str, message: str):
        super().__init__(message)
        self.error_class = error_class


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError("io_error", f"cannot read {path}: {exc}") from exc


def _load_config(args) -> ServiceConfig:
    try:
        return load_config(args.config) if args.config else load_config()
    except (ConfigError, OSError) as exc:
        raise CliError("config_invalid", str(exc)) from exc


def _providers(config: ServiceConfig, mode: str):
    try:
        generator, scorer, embedder = build_providers(config, mode)
    except ConfigError as exc:
        raise CliError("config_invalid", str(exc)) from exc
    if generator is None or embedder is None:
        raise CliError(
            "provider_unconfigured",
            "set PROVIDER_URL and EMBED_URL (or pass --provider mock)",
        )
    return generator, scorer, embedder


def _parse_date(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError as exc:
        raise CliError("input_invalid", f"bad date {text!r}, expected YYYY-MM-DD") from exc


# -- subcommands ---------------------------------------------------------------


def cmd_ingest(args) -> int:
    works, skipped = load_works(args.works)
    policy = FilterPolicy(
        require_english=args.require_english,
        min_citations=args.min_citations,
        recent_uncited_months=args.recent_uncited_months,
    )
    detector = TrigramLanguageDetector() if args.detect_language else None
    now = _parse_date(args.now) if args.now else dt.date.today()
    kept = filter_works(works, policy, now=now, detector=detector)
    if args.out:
        write_works(kept, args.out)
    report = IngestReport(
        parsed=len(works),
        skipped=skipped,
        filtered=len(works) - len(kept),
        retained=len(kept),
    )
    print(json.dumps(report.to_dict()))
    return 0


def cmd_index(args) -> int:
    config = _load_config(args)
    works, _ = load_works(args.works)
    if args.embedder == "hash" or (args.embedder == "auto" and not config.embed_url):
        embedder = HashEmbedder(dimension=args.dim, seed=args.seed)
    else:
        _, _, embedder = _providers(config, "http")
    params = HnswParams(
        m=args.hnsw_m,
        ef_construction=args.hnsw_ef_construction,
        ef_search=args.hnsw_ef_search,
        seed=args.seed,
    )
    try:
        index = build_index(
            list(embed_works(works, embedder)),
            metric=args.metric,
            backend=args.backend,
            hnsw_params=params,
        )
        save_index(index, args.out)
    except (ValueError, ProviderError) as exc:
        raise CliError("index_error", str(exc)) from exc
    print(json.dumps(index.describe()))
    return 0


def cmd_index_info(args) -> int:
    try:
        index = load_index(args.path)
    except (ValueError, OSError) as exc:
        raise CliError("index_error", str(exc)) from exc
    print(json.dumps(index.describe()))
    return 0


def cmd_suggest(args) -> int:
    config = _load_config(args)
    generator, scorer, embedder = _providers(config, args.provider)
    try:
        runtime_works, _ = load_works(args.works)
        index = load_index(args.index)
    except (ValueError, OSError) as exc:
        raise CliError("index_error", str(exc)) from exc
    document = _read(args.document)
    bibtex = _read(args.bibtex) if args.bibtex else ""
    if not 0 <= args.cursor <= len(document):
        raise CliError("input_invalid", f"cursor {args.cursor} outside document bounds")
    templates = load_templates(config.template_dir)
    suggest_config = SuggestConfig(
        k=args.k,
        max_suggestions=args.max_suggestions,
        seed=args.seed,
        ranker=args.ranker,
    )
    try:
        batch = suggest(
            document,
            args.cursor,
            bibtex,
            index,
            {w.id: w for w in runtime_works},
            generator,
            scorer,
            embedder,
            templates,
            suggest_config,
        )
    except SuggestStageError as exc:
        raise CliError("provider_failure", f"stage={exc.stage} {exc.cause}") from exc
    payload = batch.to_json_dict()
    payload["seed"] = args.seed
    print(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))
    return 0


def cmd_intro(args) -> int:
    config = _load_config(args)
    generator, scorer, embedder = _providers(config, args.provider)
    abstract = args.abstract or (_read(args.abstract_file) if args.abstract_file else "")
    if not abstract.strip():
        raise CliError("input_invalid", "an abstract is required (--abstract/--abstract-file)")
    manuscript = _read(args.manuscript)
    bib_works = parse_bib_works(_read(args.bibtex))
    works_by_id = {}
    if args.works:
        corpus, _ = load_works(args.works)
        works_by_id = {w.id: w for w in corpus}
    refs, resolution = resolve_references(bib_works, works_by_id)
    if not refs:
        raise CliError("references_unresolved", json.dumps(resolution))
    templates = load_templates(config.template_dir)
    policy = RecencyPolicy(y_years=args.y_years)
    try:
        state = run_intro_chain(
            manuscript,
            refs,
            policy,
            generator,
            templates,
            abstract=abstract,
            keep_fraction=args.keep_fraction,
            embedder=embedder,
        )
    except ChainStageError as exc:
        raise CliError("chain_error", f"stage={exc.stage} {exc.message}") from exc
    out_path = Path(args.out)
    out_path.write_text(state.intro_text + "\n", encoding="utf-8")
    trace_path = out_path.with_suffix(".trace.json")
    trace_path.write_text(
        json.dumps(state.to_json_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    print(json.dumps({"intro": str(out_path), "trace": str(trace_path), "seed": args.seed}))
    return 0


def _resolve_ranker(name: str, config: ServiceConfig, provider_mode: str):
    if name in BUILTIN_RANKERS:
        return BUILTIN_RANKERS[name]
    generator, scorer, _ = _providers(config, provider_mode)
    if name == "score":
        return make_score_ranker(scorer, load_templates(config.template_dir))
    if name == "pairwise":
        return make_pairwise_ranker(generator, load_templates(config.template_dir))
    raise CliError("input_invalid", f"unknown ranker {name!r}")


def cmd_eval_retrieval(args) -> int:
    config = _load_config(args)
    works, _ = load_works(args.works)
    works_by_id = {w.id: w for w in works}
    papers = [json.loads(line) for line in _read(args.papers).splitlines() if line.strip()]
    import random as _random

    seeds, build_report = build_eval_set(
        papers,
        set(works_by_id),
        per_paper=args.per_paper,
        min_sentences=args.min_sentences,
        rng=_random.Random(args.seed),
    )
    if not seeds:
        raise CliError("input_invalid", f"no eval cases built: {json.dumps(build_report)}")
    if args.index:
        index = load_index(args.index)
    else:
        embedder = HashEmbedder(dimension=config.embed_dimension, seed=args.seed)
        index = build_index(list(embed_works(works, embedder)))
    strategies = list(STRATEGIES) if "all" in args.strategy else args.strategy
    ranker = _resolve_ranker(args.ranker, config, args.provider)
    report = run_retrieval_eval(
        seeds,
        ranker,
        works_by_id,
        strategies=strategies,
        ns=args.n,
        index=index,
        seed=args.seed,
        backfill=args.backfill,
        ranker_name=args.ranker,
    )
    print(format_retrieval_table(report), end="")
    if args.out_dir:
        paths = write_retrieval_report(report, args.out_dir)
        print(json.dumps({k: str(v) for k, v in paths.items()}))
    return 0


def cmd_eval_intro(args) -> int:
    config = _load_config(args)
    generator, scorer, _ = _providers(config, args.provider)
    pairs = []
    for line in _read(args.pairs).splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        pairs.append((str(record["generated"]), str(record["original"])))
    if not pairs:
        raise CliError("input_invalid", "no pairs found")
    templates = load_templates(config.template_dir)
    report = run_intro_eval(pairs, generator, scorer, templates, num_claims=args.num_claims)
    print(format_intro_table(report), end="")
    if args.out_dir:
        paths = write_intro_report(report, args.out_dir)
        print(json.dumps({k: str(v) for k, v in paths.items()}))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = _load_config(args)
    if args.host:
        config.listen_host = args.host
    if args.port:
        config.listen_port = args.port
    try:
        runtime = build_runtime(config, provider_mode=args.provider)
    except (ConfigError, OSError, ValueError) as exc:
        raise CliError("config_invalid", str(exc)) from exc
    uvicorn.run(create_app(runtime), host=config.listen_host, port=config.listen_port)
    return 0


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="citescribe")
    parser.add_argument("--config", help="path to a key = value config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse and filter a record file")
    p.add_argument("--works", required=True)
    p.add_argument("--out")
    p.add_argument("--min-citations", type=int, default=0)
    p.add_argument("--recent-uncited-months", type=int, default=None)
    p.add_argument("--require-english", action="store_true")
    p.add_argument("--detect-language", action="store_true")
    p.add_argument("--now", help="reference date YYYY-MM-DD (default: today)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("index", help="embed works and build an index file")
    p.add_argument("--works", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--metric", choices=["cosine", "euclidean"], default="cosine")
    p.add_argument("--backend", choices=["exact", "approximate"], default="exact")
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--embedder", choices=["auto", "hash", "http"], default="auto")
    p.add_argument("--hnsw-m", type=int, default=16)
    p.add_argument("--hnsw-ef-construction", type=int, default=200)
    p.add_argument("--hnsw-ef-search", type=int, default=64)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("index-info", help="print an index file header as JSON")
    p.add_argument("path")
    p.set_defaults(func=cmd_index_info)

    p = sub.add_parser("suggest", help="rank citation suggestions for a cursor position")
    p.add_argument("--document", required=True)
    p.add_argument("--cursor", type=int, required=True)
    p.add_argument("--bibtex")
    p.add_argument("--works", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--provider", choices=["auto", "http", "mock"], default="auto")
    p.add_argument("--ranker", choices=["score", "pairwise"], default="score")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--max-suggestions", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_suggest)

    p = sub.add_parser("intro", help="draft an introduction and write its trace")
    p.add_argument("--manuscript", required=True)
    p.add_argument("--bibtex", required=True)
    p.add_argument("--abstract")
    p.add_argument("--abstract-file")
    p.add_argument("--works")
    p.add_argument("--out", default="intro.txt")
    p.add_argument("--provider", choices=["auto", "http", "mock"], default="auto")
    p.add_argument("--y-years", type=int, default=5)
    p.add_argument("--keep-fraction", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_intro)

    p = sub.add_parser("eval-retrieval", help="ground-truth retrieval evaluation")
    p.add_argument("--papers", required=True, help="JSONL of papers with citing sentences")
    p.add_argument("--works", required=True)
    p.add_argument("--index")
    p.add_argument("--strategy", action="append", default=None)
    p.add_argument("--n", type=int, action="append", default=None)
    p.add_argument(
        "--ranker",
        choices=["oracle", "anti_oracle", "random", "score", "pairwise"],
        default="score",
    )
    p.add_argument("--provider", choices=["auto", "http", "mock"], default="auto")
    p.add_argument("--per-paper", type=int, default=5)
    p.add_argument("--min-sentences", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backfill", action="store_true")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_eval_retrieval)

    p = sub.add_parser("eval-intro", help="introduction quality evaluation")
    p.add_argument("--pairs", required=True, help="JSONL of {generated, original}")
    p.add_argument("--num-claims", type=int, default=4)
    p.add_argument("--provider", choices=["auto", "http", "mock"], default="auto")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_eval_intro)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--provider", choices=["auto", "http", "mock"], default="auto")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "strategy", None) is None and args.command == "eval-retrieval":
        args.strategy = ["all"]
    if getattr(args, "n", None) is None and args.command == "eval-retrieval":
        args.n = [3, 5, 10]
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc.error_class}: {exc}", file=sys.stderr)
        return 2
    except ProviderError as exc:
        print(f"error: provider_failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
