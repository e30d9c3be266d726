"""Command-line entry point: index, search, run-topics, tuples, evaluate, serve."""

from __future__ import annotations

import argparse
import logging
import sys

from scisearch import __version__
from scisearch.corpus import (
    CorpusFormatError,
    InsufficientNegativesError,
    build_bipartite_graph,
    generate_tuples,
    load_corpus,
    load_topics,
    write_tuples,
)
from scisearch.evaluation import (
    BPREF_VARIANTS,
    NDCG_VARIANTS,
    EvalConfig,
    EvalFormatError,
    evaluate_run,
    parse_qrels,
    parse_run,
    write_run,
)
from scisearch.fusion import EmptyQueryError, FusionConfig
from scisearch.index import Bm25Params
from scisearch.pipeline import TOPIC_FIELDS, run_search, run_topics
from scisearch.rank import RankConfig
from scisearch.snapshot import (
    PipelineConfig,
    SnapshotError,
    build_snapshot,
    load_snapshot,
    save_snapshot,
)

logger = logging.getLogger(__name__)


def _add_fusion_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mu", type=float, default=None, help="dense/keyword mix in [0,1]")
    parser.add_argument("--rrf-k", type=float, default=None, help="rank-fusion constant, > 0")
    parser.add_argument("--pool-size", type=int, default=None, help="candidate pool size")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scisearch", description=__doc__)
    parser.add_argument("--version", action="version", version=f"scisearch {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="build a search snapshot from a corpus")
    p_index.add_argument("--corpus", required=True, help="JSONL file or directory")
    p_index.add_argument("--out", required=True, help="snapshot directory to write")
    p_index.add_argument("--strict", action="store_true", help="fail on malformed records")
    p_index.add_argument("--dim", type=int, default=256)
    p_index.add_argument("--seed", type=int, default=42, help="embedder seed")
    p_index.add_argument("--k1", type=float, default=0.9)
    p_index.add_argument("--b", type=float, default=0.4)
    p_index.add_argument("--tag", default="scisearch", help="run tag for emitted runs")
    p_index.add_argument("--mu", type=float, default=0.7)
    p_index.add_argument("--rrf-k", type=float, default=60.0)
    p_index.add_argument("--pool-size", type=int, default=1000)
    p_index.add_argument(
        "--raw-tfidf", action="store_true",
        help="mix raw TF-IDF scores instead of per-query max-normalized ones",
    )

    p_search = sub.add_parser("search", help="query a snapshot")
    p_search.add_argument("--snapshot", required=True)
    p_search.add_argument("--query", required=True)
    p_search.add_argument("-n", type=int, default=10, help="results to print")
    p_search.add_argument("--format", choices=("table", "trec"), default="table")
    p_search.add_argument("--topic-id", type=int, default=1, help="topic id for trec output")
    _add_fusion_flags(p_search)

    p_run = sub.add_parser("run-topics", help="run a topic file, write a TREC run")
    p_run.add_argument("--snapshot", required=True)
    p_run.add_argument("--topics", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--field", choices=TOPIC_FIELDS, default="query")
    p_run.add_argument("--limit", type=int, default=1000, help="docs per topic")

    p_tuples = sub.add_parser("tuples", help="export citation-graph training tuples")
    p_tuples.add_argument("--corpus", required=True)
    p_tuples.add_argument("--out", required=True)
    p_tuples.add_argument("--seed", type=int, default=42)
    p_tuples.add_argument("--strict", action="store_true")

    p_eval = sub.add_parser("evaluate", help="score a run against qrels")
    p_eval.add_argument("--run", required=True)
    p_eval.add_argument("--qrels", required=True)
    p_eval.add_argument("--judged-only", action="store_true")
    p_eval.add_argument("--ndcg-variant", choices=NDCG_VARIANTS, default="classic")
    p_eval.add_argument("--bpref-variant", choices=BPREF_VARIANTS, default="classic")
    p_eval.add_argument("--rel-threshold", type=int, default=1)
    p_eval.add_argument("--json", default=None, help="also write the report as JSON")

    p_serve = sub.add_parser("serve", help="serve the HTTP search API")
    p_serve.add_argument("--snapshot", required=True)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)

    return parser


def _cmd_index(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus, strict=args.strict)
    if not corpus:
        print("empty corpus", file=sys.stderr)
        return 1
    config = PipelineConfig(
        fusion=FusionConfig(
            mu=args.mu, rrf_k=args.rrf_k, pool_size=args.pool_size,
            normalize_tfidf=not args.raw_tfidf,
        ),
        bm25=Bm25Params(k1=args.k1, b=args.b),
        rank=RankConfig(),
        dim=args.dim,
        embedder_seed=args.seed,
        run_tag=args.tag,
    )
    snapshot = build_snapshot(corpus, config)
    save_snapshot(snapshot, args.out)
    print(f"indexed {len(snapshot.documents)} documents, {len(snapshot.paragraphs)} paragraphs")
    print(f"snapshot written to {args.out}")
    return 0


def _cmd_search(args: argparse.Namespace) -> int:
    snapshot = load_snapshot(args.snapshot)
    output = run_search(
        snapshot, args.query, n=args.n,
        mu=args.mu, rrf_k=args.rrf_k, pool_size=args.pool_size,
    )
    if args.format == "trec":
        tag = snapshot.config.run_tag
        for i, hit in enumerate(output.results, start=1):
            print(f"{args.topic_id} Q0 {hit.doc_id} {i} {hit.final!r} {tag}")
        return 0
    for i, hit in enumerate(output.results, start=1):
        print(
            f"{i:>3}  {hit.doc_id}  final={hit.final:.6f}  rrf={hit.rrf:.6f}  "
            f"q={hit.q_factor:.4f}  s={hit.s_factor:.4f}  {hit.title}"
        )
        if hit.snippet:
            print(f"     {hit.snippet}")
    if output.summary:
        print(f"summary: {output.summary}")
    for span in output.answer_spans:
        print(f"span: {span}")
    return 0


def _cmd_run_topics(args: argparse.Namespace) -> int:
    snapshot = load_snapshot(args.snapshot)
    topics = load_topics(args.topics)
    run = run_topics(snapshot, topics, field=args.field, limit=args.limit)
    write_run(run, args.out)
    print(f"wrote {sum(len(v) for v in run.topics.values())} lines for "
          f"{len(run.topics)} topics to {args.out}")
    return 0


def _cmd_tuples(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus, strict=args.strict)
    graph = build_bipartite_graph(corpus)
    tuples = generate_tuples(graph, args.seed)
    write_tuples(tuples, args.out)
    positives = sum(1 for t in tuples if t.label == "positive")
    print(f"wrote {positives} positive and {len(tuples) - positives} negative tuples to {args.out}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    run = parse_run(args.run)
    qrels = parse_qrels(args.qrels)
    config = EvalConfig(
        judged_only=args.judged_only,
        ndcg_variant=args.ndcg_variant,
        bpref_variant=args.bpref_variant,
        rel_threshold=args.rel_threshold,
    )
    report = evaluate_run(run, qrels, config)
    print(report.render_table())
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
            fh.write("\n")
        print(f"report written to {args.json}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from scisearch.server import create_app

    app = create_app(snapshot_path=args.snapshot)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


_COMMANDS = {
    "index": _cmd_index,
    "search": _cmd_search,
    "run-topics": _cmd_run_topics,
    "tuples": _cmd_tuples,
    "evaluate": _cmd_evaluate,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (
        CorpusFormatError,
        EvalFormatError,
        SnapshotError,
        InsufficientNegativesError,
        EmptyQueryError,
        FileNotFoundError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
