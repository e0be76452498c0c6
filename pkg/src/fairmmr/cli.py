"""Command-line entry points.

Subcommands cover the whole pipeline: ``ingest`` (validate/normalize a
catalog), ``synth`` (generate a synthetic corpus), ``knn``, ``rerank``,
``tune``, ``eval`` (full experiment), and ``report`` (re-render an
aggregate table). Exit codes: 0 success, 2 validation error, 3
runtime/data error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .catalog import CatalogError, load_catalog, save_catalog
from .harness import (
    ExperimentSpec,
    HarnessError,
    SyntheticSpec,
    generate_synthetic,
    load_summary,
    render_report,
    run_experiment,
)
from .metrics import MetricsError
from .representations import (
    RepresentationError,
    build_representations,
    load_representations,
    save_representations,
)
from .reranker import RerankConfig, RerankError, rerank
from .retrieval import RetrievalError, knn
from .tuning import TuningConfig, TuningError, tune

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3

_VALIDATION_ERRORS = (
    CatalogError,
    RepresentationError,
    RetrievalError,
    RerankError,
    MetricsError,
    TuningError,
    HarnessError,
    argparse.ArgumentTypeError,
)

_KERNELS = {"mmr": "classic_mmr", "fmmr": "fmmr"}


def _add_catalog_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--embeddings", required=True, help="embeddings file")
    parser.add_argument("--tags", required=True, help="tags file")
    parser.add_argument("--mapping", required=True, help="group mapping file")


def _load(args) -> "Catalog":
    return load_catalog(args.embeddings, args.tags, args.mapping)


def _cmd_ingest(args) -> int:
    catalog = _load(args)
    counts = {
        g: sum(1 for item in catalog if g in item.groups)
        for g in catalog.group_mapping.groups
    }
    print(f"items: {len(catalog)}")
    print(f"dimension: {catalog.dimension}")
    for group, count in counts.items():
        print(f"group {group}: {count}")
    if args.out_embeddings:
        save_catalog(
            catalog, args.out_embeddings, args.out_tags, args.out_mapping
        )
    return EXIT_OK


def _cmd_synth(args) -> int:
    spec = SyntheticSpec(
        num_groups=args.groups,
        items_per_group=args.items_per_group,
        dimension=args.dim,
        separation=args.separation,
        noise_scale=args.noise,
        num_topics=args.topics,
        topic_scale=args.topic_scale,
        groupless_count=args.groupless,
    )
    catalog = generate_synthetic(spec, seed=args.seed)
    save_catalog(catalog, args.out_embeddings, args.out_tags, args.out_mapping)
    print(f"wrote {len(catalog)} items, dimension {catalog.dimension}")
    return EXIT_OK


def _query_vector(catalog, args):
    if args.query_id is not None:
        if args.query_id not in catalog:
            raise CatalogError(f"unknown query id {args.query_id!r}")
        return catalog[args.query_id].vector, args.query_id
    raise CatalogError("--query-id is required")


def _cmd_knn(args) -> int:
    catalog = _load(args)
    vector, exclude = _query_vector(catalog, args)
    pool = knn(
        catalog, vector, args.pool_size, metric=args.metric, exclude=exclude
    )
    for candidate in pool.candidates:
        print(f"{candidate.id}\t{candidate.distance:.6f}")
    return EXIT_OK


def _cmd_rerank(args) -> int:
    catalog = _load(args)
    vector, exclude = _query_vector(catalog, args)
    pool = knn(
        catalog, vector, args.pool_size, metric=args.metric, exclude=exclude
    )
    kernel = _KERNELS[args.kernel]
    reps = None
    if kernel == "fmmr":
        if args.reps:
            reps = load_representations(args.reps)
        else:
            reps = build_representations(
                catalog, args.fraction, seed=args.seed
            )
    config = RerankConfig(
        lam=args.lam, k=args.k, kernel=kernel, metric=args.metric
    )
    result = rerank(pool, catalog, reps, config)
    for entry in result.entries:
        print(
            f"{entry.id}\t{entry.objective_score:.6f}"
            f"\t{entry.relevance:.6f}\t{entry.diversity_gain:.6f}"
        )
    return EXIT_OK


def _cmd_tune(args) -> int:
    catalog = _load(args)
    kernel = _KERNELS[args.kernel]
    reps = None
    if kernel == "fmmr":
        reps = build_representations(catalog, args.fraction, seed=args.seed)
    tuning = TuningConfig(
        grid_size=args.grid_size,
        degradation_ratio=args.d,
        k=args.k,
        pool_size=args.pool_size,
        metric=args.metric,
    )
    from .harness import select_queries, split_queries

    queries = select_queries(catalog)
    if args.train_size and args.train_size < len(queries):
        train_ids, _ = split_queries(queries, args.train_size, args.seed)
    else:
        train_ids = queries
    result = tune(
        [catalog[q] for q in train_ids], catalog, reps, tuning, kernel=kernel
    )
    if args.curves_dir:
        from .harness import _write_curves

        _write_curves(Path(args.curves_dir), result)
    print(f"overall_lambda\t{result.overall_lambda:.6f}")
    for qid in sorted(result.per_query):
        print(f"{qid}\t{result.per_query[qid].best_lambda:.6f}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    catalog = _load(args)
    spec = ExperimentSpec(
        methods=tuple(args.methods.split(",")),
        sampling_fractions=tuple(float(f) for f in args.fractions.split(",")),
        train_sample_size=args.train_size,
        k=args.k,
        pool_size=args.pool_size,
        grid_size=args.grid_size,
        degradation_ratio=args.d,
        metric=args.metric,
        seed=args.seed,
    )
    report = run_experiment(spec, catalog, args.out)
    print(render_report(report.rows, spec.k), end="")
    return EXIT_OK


def _cmd_report(args) -> int:
    rows = load_summary(Path(args.dir) / "summary.tsv")
    print(render_report(rows, args.k), end="")
    return EXIT_OK


def _cmd_reps(args) -> int:
    catalog = _load(args)
    reps = build_representations(catalog, args.fraction, seed=args.seed)
    save_representations(reps, args.out)
    print(f"wrote {len(reps)} representations to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairmmr",
        description="Fairness-aware re-ranking over dense descriptors",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load, validate, and summarize a catalog")
    _add_catalog_args(p)
    p.add_argument("--out-embeddings")
    p.add_argument("--out-tags")
    p.add_argument("--out-mapping")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("synth", help="generate a synthetic catalog")
    p.add_argument("--groups", type=int, default=2)
    p.add_argument("--items-per-group", type=int, default=50)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--separation", type=float, default=10.0)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--topics", type=int, default=4)
    p.add_argument("--topic-scale", type=float, default=10.0)
    p.add_argument("--groupless", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-embeddings", required=True)
    p.add_argument("--out-tags", required=True)
    p.add_argument("--out-mapping", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("knn", help="relevance-ranked candidate pool for a query")
    _add_catalog_args(p)
    p.add_argument("--query-id")
    p.add_argument("--pool-size", type=int, default=50)
    p.add_argument("--metric", choices=("euclidean", "manhattan"), default="euclidean")
    p.set_defaults(func=_cmd_knn)

    p = sub.add_parser("rerank", help="KNN then greedy re-ranking")
    _add_catalog_args(p)
    p.add_argument("--query-id")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--pool-size", type=int, default=50)
    p.add_argument("--kernel", choices=tuple(_KERNELS), default="fmmr")
    p.add_argument("--metric", choices=("euclidean", "manhattan"), default="euclidean")
    p.add_argument("--fraction", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", help="representations file (else built from catalog)")
    p.set_defaults(func=_cmd_rerank)

    p = sub.add_parser("reps", help="build and save fairness representations")
    _add_catalog_args(p)
    p.add_argument("--fraction", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_reps)

    p = sub.add_parser("tune", help="grid search for the trade-off lambda")
    _add_catalog_args(p)
    p.add_argument("--kernel", choices=tuple(_KERNELS), default="fmmr")
    p.add_argument("--metric", choices=("euclidean", "manhattan"), default="euclidean")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--pool-size", type=int, default=50)
    p.add_argument("--grid-size", type=int, default=50)
    p.add_argument("--d", type=float, default=0.25)
    p.add_argument("--fraction", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-size", type=int, default=0, help="0 = all queries")
    p.add_argument("--curves-dir")
    p.set_defaults(func=_cmd_tune)

    p = sub.add_parser("eval", help="full tuning + evaluation protocol")
    _add_catalog_args(p)
    p.add_argument("--methods", default="knn_only,classic_mmr,fmmr")
    p.add_argument("--fractions", default="1.0")
    p.add_argument("--train-size", type=int, default=100)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--pool-size", type=int, default=50)
    p.add_argument("--grid-size", type=int, default=50)
    p.add_argument("--d", type=float, default=0.25)
    p.add_argument("--metric", choices=("euclidean", "manhattan"), default="euclidean")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("report", help="render the aggregate table from an eval run")
    p.add_argument("--dir", required=True)
    p.add_argument("--k", type=int, default=10)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
