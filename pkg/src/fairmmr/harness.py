"""Experiment orchestration: synthetic corpora, train/test protocol,
end-to-end tuning and evaluation, and tabular reports.

The real stock-photo corpus behind the original study is not
redistributable, so experiments run either on user-supplied catalog
files or on a seeded synthetic stand-in with the same structure: group
clusters in descriptor space, shared topic clusters that drive the
tag-overlap precision rule, and optional groupless filler items.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .catalog import Catalog, EmbeddingItem, GroupMapping, build_catalog
from .metrics import (
    ConfidenceInterval,
    evaluate_query,
    t_confidence_interval,
)
from .representations import RepresentationSet, build_representations
from .tuning import TuningConfig, TuningResult, query_engine, tune

METHODS = ("knn_only", "classic_mmr", "fmmr")

# Stage offsets for deriving per-stage RNG streams from the root seed.
_STAGE_SYNTH = 0
_STAGE_SPLIT = 1
_STAGE_REPS = 2


class HarnessError(ValueError):
    """Raised for invalid experiment or generator specifications."""


def stage_rng(seed: int, stage: int) -> np.random.Generator:
    """Independent, reproducible RNG stream for one pipeline stage."""
    return np.random.default_rng(np.random.SeedSequence([seed, stage]))


@dataclass(frozen=True)
class SyntheticSpec:
    """Generator knobs for a desk-scale synthetic catalog.

    Geometry: item = group mean + shared topic center + isotropic noise.
    Group means sit on distinct axes at pairwise distance ``separation``;
    topic centers occupy further axes and are shared across groups, so
    relevance clusters cut across demographic clusters the way real
    content topics do. Tags are the item's group tag (drawn from that
    group's vocabulary) plus its topic's tags.
    """

    num_groups: int = 2
    items_per_group: int | Sequence[int] = 50
    dimension: int = 16
    separation: float = 10.0
    noise_scale: float = 1.0
    num_topics: int = 4
    topic_scale: float = 10.0
    group_names: tuple[str, ...] | None = None
    group_means: np.ndarray | None = None  # (num_groups, dimension)
    group_tag_vocab: dict[str, tuple[str, ...]] | None = None
    groupless_count: int = 0

    def __post_init__(self) -> None:
        if self.num_groups < 1:
            raise HarnessError("num_groups must be >= 1")
        if self.noise_scale <= 0:
            raise HarnessError("noise scale must be > 0")
        if self.group_means is None and self.dimension < self.num_groups + self.num_topics:
            raise HarnessError(
                "dimension must be >= num_groups + num_topics for default means"
            )

    def names(self) -> tuple[str, ...]:
        if self.group_names is not None:
            return self.group_names
        return tuple(f"g{i}" for i in range(self.num_groups))

    def per_group_counts(self) -> tuple[int, ...]:
        if isinstance(self.items_per_group, int):
            return tuple([self.items_per_group] * self.num_groups)
        counts = tuple(int(c) for c in self.items_per_group)
        if len(counts) != self.num_groups:
            raise HarnessError("items_per_group length must equal num_groups")
        return counts

    def means(self) -> np.ndarray:
        if self.group_means is not None:
            means = np.asarray(self.group_means, dtype=np.float64)
            if means.shape != (self.num_groups, self.dimension):
                raise HarnessError("group_means shape mismatch")
        else:
            # Distinct axes, scaled so pairwise mean distance = separation.
            means = np.zeros((self.num_groups, self.dimension))
            for g in range(self.num_groups):
                means[g, g] = self.separation / math.sqrt(2.0)
        if len({tuple(row) for row in means}) != self.num_groups:
            raise HarnessError("group means must be pairwise distinct")
        return means


def _topic_centers(spec: SyntheticSpec) -> np.ndarray:
    centers = np.zeros((max(spec.num_topics, 1), spec.dimension))
    if spec.num_topics > 0 and spec.group_means is None:
        for t in range(spec.num_topics):
            centers[t, spec.num_groups + t] = spec.topic_scale
    return centers


def generate_synthetic(spec: SyntheticSpec, seed: int = 0) -> Catalog:
    """Deterministically generate a catalog from the spec and seed."""
    rng = stage_rng(seed, _STAGE_SYNTH)
    names = spec.names()
    means = spec.means()
    centers = _topic_centers(spec)
    num_topics = max(spec.num_topics, 1)
    vocab = spec.group_tag_vocab or {name: (name,) for name in names}

    vectors: dict[str, np.ndarray] = {}
    tags: dict[str, frozenset[str]] = {}

    def add_item(item_id: str, base: np.ndarray, topic: int, group: str | None):
        vectors[item_id] = (
            base + centers[topic] + spec.noise_scale * rng.standard_normal(spec.dimension)
        )
        item_tags = {f"topic{topic}", f"style{topic}"}
        if group is not None:
            options = vocab.get(group, (group,))
            item_tags.add(options[int(rng.integers(len(options)))])
        tags[item_id] = frozenset(item_tags)

    for g, (name, count) in enumerate(zip(names, spec.per_group_counts())):
        for n in range(count):
            add_item(
                f"{name}-{n:05d}", means[g], int(rng.integers(num_topics)), name
            )
    for n in range(spec.groupless_count):
        add_item(
            f"zz-none-{n:05d}",
            means.mean(axis=0),
            int(rng.integers(num_topics)),
            None,
        )

    rules = {tag: name for name in names for tag in vocab.get(name, (name,))}
    mapping = GroupMapping(groups=names, tag_rules=rules)
    return build_catalog(vectors, tags, mapping)


def select_queries(
    catalog: Catalog,
    tag_predicate: Callable[[frozenset[str]], bool] | None = None,
) -> list[str]:
    """Sorted ids of items whose tags satisfy the predicate.

    The default predicate keeps items carrying any group-mapped tag,
    i.e. the queries for which the fairness ratio is computable.
    """
    if tag_predicate is None:
        rules = catalog.group_mapping.tag_rules
        tag_predicate = lambda tags: any(t in rules for t in tags)
    selected = [item.id for item in catalog if tag_predicate(item.tags)]
    if not selected:
        raise HarnessError("query predicate matched no items")
    return selected


def split_queries(
    query_ids: Sequence[str], train_size: int, seed: int
) -> tuple[list[str], list[str]]:
    """Disjoint train/test split: seeded uniform sample without
    replacement for train, remainder for test. Both id-sorted."""
    if train_size >= len(query_ids):
        raise HarnessError(
            f"train_size {train_size} leaves no test queries "
            f"(only {len(query_ids)} queries)"
        )
    rng = stage_rng(seed, _STAGE_SPLIT)
    ordered = sorted(query_ids)
    picks = rng.choice(len(ordered), size=train_size, replace=False)
    train = sorted(ordered[i] for i in picks)
    train_set = set(train)
    test = [q for q in ordered if q not in train_set]
    return train, test


@dataclass(frozen=True)
class ExperimentSpec:
    """Full protocol settings for one experiment run."""

    methods: tuple[str, ...] = METHODS
    sampling_fractions: tuple[float, ...] = (1.0,)
    train_sample_size: int = 100
    k: int = 10
    pool_size: int = 50
    grid_size: int = 50
    degradation_ratio: float = 0.25
    metric: str = "euclidean"
    seed: int = 0
    groups: tuple[str, str] | None = None
    normalize: bool = False

    def __post_init__(self) -> None:
        for method in self.methods:
            if method not in METHODS:
                raise HarnessError(f"unknown method {method!r}")

    def tuning(self) -> TuningConfig:
        return TuningConfig(
            grid_size=self.grid_size,
            degradation_ratio=self.degradation_ratio,
            k=self.k,
            pool_size=self.pool_size,
            metric=self.metric,
            normalize=self.normalize,
            groups=self.groups,
        )


@dataclass(frozen=True)
class MethodRow:
    """One aggregate report row: a method at its tuned operating point."""

    method: str
    sampling_fraction: float | None
    lam: float
    p_ci: ConfidenceInterval
    fr_ci: ConfidenceInterval | None
    entropy_mean: float | None
    n_test: int
    constraint_violations: int


@dataclass(frozen=True)
class ExperimentReport:
    rows: tuple[MethodRow, ...]
    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]


def _evaluate_method(
    catalog: Catalog,
    test_queries: list[EmbeddingItem],
    reps: RepresentationSet | None,
    kernel: str,
    lam: float,
    tuning: TuningConfig,
) -> list:
    evaluations = []
    for query in test_queries:
        engine = query_engine(query, catalog, reps, tuning, kernel)
        result = engine.select(lam, tuning.k)
        evaluations.append(
            (
                evaluate_query(query, result, catalog, tuning.k, tuning.groups),
                evaluate_query(
                    query,
                    engine.select(1.0, tuning.k),
                    catalog,
                    tuning.k,
                    tuning.groups,
                ),
            )
        )
    return evaluations


def _aggregate(
    method: str,
    fraction: float | None,
    lam: float,
    evaluations: list,
    d: float,
) -> MethodRow:
    p_samples = [e.p_at_k for e, _ in evaluations if e.p_at_k is not None]
    fr_samples = [e.fr_at_k for e, _ in evaluations if e.fr_at_k is not None]
    ent_samples = [
        e.entropy_at_k for e, _ in evaluations if e.entropy_at_k is not None
    ]
    violations = sum(
        1
        for e, base in evaluations
        if e.p_at_k is not None
        and base.p_at_k is not None
        and e.p_at_k < (1.0 - d) * base.p_at_k - 1e-12
    )
    return MethodRow(
        method=method,
        sampling_fraction=fraction,
        lam=lam,
        p_ci=t_confidence_interval(p_samples),
        fr_ci=t_confidence_interval(fr_samples) if len(fr_samples) >= 2 else None,
        entropy_mean=float(np.mean(ent_samples)) if ent_samples else None,
        n_test=len(evaluations),
        constraint_violations=violations,
    )


def _fmt(value: float | None, digits: int = 6) -> str:
    return "NA" if value is None else f"{value:.{digits}f}"


def _write_per_query(path: Path, lam: float, evaluations: list) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("query_id\tlambda\tp_at_k\tfr_at_k\tentropy_at_k\n")
        for evaluation, _ in evaluations:
            handle.write(
                f"{evaluation.query_id}\t{_fmt(lam)}\t{_fmt(evaluation.p_at_k)}"
                f"\t{_fmt(evaluation.fr_at_k)}\t{_fmt(evaluation.entropy_at_k)}\n"
            )


def _write_curves(directory: Path, result: TuningResult) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for qid in sorted(result.per_query):
        qt = result.per_query[qid]
        with open(directory / f"{qid}.tsv", "w", encoding="utf-8") as handle:
            handle.write("lambda\tp_at_k\tfr_at_k\n")
            for point in qt.curve:
                handle.write(
                    f"{_fmt(point.lam)}\t{_fmt(point.p_at_k)}"
                    f"\t{_fmt(point.fr_at_k)}\n"
                )


def render_report(rows: Sequence[MethodRow], k: int) -> str:
    """Aligned-text aggregate table, one row per method/fraction."""
    header = (
        "method",
        "fraction",
        "lambda",
        f"p@{k}",
        f"fr@{k}",
        "entropy",
        "n",
        "violations",
    )
    body = []
    for row in rows:
        fr_text = "NA" if row.fr_ci is None else (
            f"{row.fr_ci.mean:.2f} +/- {row.fr_ci.half_width:.2f}"
        )
        body.append(
            (
                row.method,
                "NA" if row.sampling_fraction is None else f"{row.sampling_fraction:g}",
                f"{row.lam:.4f}",
                f"{row.p_ci.mean:.2f} +/- {row.p_ci.half_width:.2f}",
                fr_text,
                _fmt(row.entropy_mean, 4),
                str(row.n_test),
                str(row.constraint_violations),
            )
        )
    widths = [
        max(len(header[i]), *(len(r[i]) for r in body)) if body else len(header[i])
        for i in range(len(header))
    ]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip()
    ]
    lines.append("  ".join("-" * w for w in widths))
    for r in body:
        lines.append("  ".join(r[i].ljust(widths[i]) for i in range(len(r))).rstrip())
    return "\n".join(lines) + "\n"


def _summary_line(row: MethodRow) -> str:
    fr_mean = None if row.fr_ci is None else row.fr_ci.mean
    fr_hw = None if row.fr_ci is None else row.fr_ci.half_width
    return "\t".join(
        [
            row.method,
            _fmt(row.sampling_fraction),
            _fmt(row.lam),
            _fmt(row.p_ci.mean),
            _fmt(row.p_ci.half_width),
            _fmt(fr_mean),
            _fmt(fr_hw),
            _fmt(row.entropy_mean),
            str(row.n_test),
            str(row.constraint_violations),
        ]
    )


SUMMARY_HEADER = (
    "method\tfraction\tlambda\tp_mean\tp_hw\tfr_mean\tfr_hw\tentropy\tn\tviolations"
)


def load_summary(path: str | Path) -> list[MethodRow]:
    rows = []
    with open(path, encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    for line in lines[1:]:
        if not line:
            continue
        (method, fraction, lam, p_mean, p_hw, fr_mean, fr_hw, ent, n, viol) = (
            line.split("\t")
        )
        n_test = int(n)
        fr_ci = None
        if fr_mean != "NA":
            fr_ci = ConfidenceInterval(
                float(fr_mean), float(fr_hw), 0.95, n_test
            )
        rows.append(
            MethodRow(
                method=method,
                sampling_fraction=None if fraction == "NA" else float(fraction),
                lam=float(lam),
                p_ci=ConfidenceInterval(float(p_mean), float(p_hw), 0.95, n_test),
                fr_ci=fr_ci,
                entropy_mean=None if ent == "NA" else float(ent),
                n_test=n_test,
                constraint_violations=int(viol),
            )
        )
    return rows


def run_experiment(
    spec: ExperimentSpec, catalog: Catalog, out_dir: str | Path
) -> ExperimentReport:
    """Full protocol: split queries, tune each method on the train
    sample, evaluate its overall lambda on the test queries against the
    whole catalog, and write per-query records plus the aggregate table.

    Output is byte-deterministic for a fixed spec, catalog, and seed.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tuning = spec.tuning()
    query_ids = select_queries(catalog)
    train_ids, test_ids = split_queries(
        query_ids, spec.train_sample_size, spec.seed
    )
    train = [catalog[q] for q in train_ids]
    test = [catalog[q] for q in test_ids]

    rows: list[MethodRow] = []
    for method in spec.methods:
        if method == "knn_only":
            evaluations = _evaluate_method(
                catalog, test, None, "classic_mmr", 1.0, tuning
            )
            row = _aggregate(
                method, None, 1.0, evaluations, spec.degradation_ratio
            )
            _write_per_query(out / f"{method}_queries.tsv", 1.0, evaluations)
            rows.append(row)
        elif method == "classic_mmr":
            result = tune(train, catalog, None, tuning, kernel="classic_mmr")
            _write_curves(out / "curves" / method, result)
            evaluations = _evaluate_method(
                catalog, test, None, "classic_mmr", result.overall_lambda, tuning
            )
            row = _aggregate(
                method,
                None,
                result.overall_lambda,
                evaluations,
                spec.degradation_ratio,
            )
            _write_per_query(
                out / f"{method}_queries.tsv", result.overall_lambda, evaluations
            )
            rows.append(row)
        else:  # fmmr, one row per sampling fraction
            for fraction in spec.sampling_fractions:
                reps_seed = int(
                    stage_rng(spec.seed, _STAGE_REPS).integers(2**31)
                )
                reps = build_representations(catalog, fraction, seed=reps_seed)
                result = tune(train, catalog, reps, tuning, kernel="fmmr")
                label = f"{method}_frac{fraction:g}"
                _write_curves(out / "curves" / label, result)
                evaluations = _evaluate_method(
                    catalog, test, reps, "fmmr", result.overall_lambda, tuning
                )
                row = _aggregate(
                    method,
                    fraction,
                    result.overall_lambda,
                    evaluations,
                    spec.degradation_ratio,
                )
                _write_per_query(
                    out / f"{label}_queries.tsv",
                    result.overall_lambda,
                    evaluations,
                )
                rows.append(row)

    with open(out / "summary.tsv", "w", encoding="utf-8") as handle:
        handle.write(SUMMARY_HEADER + "\n")
        for row in rows:
            handle.write(_summary_line(row) + "\n")
    with open(out / "report.txt", "w", encoding="utf-8") as handle:
        handle.write(render_report(rows, spec.k))
    return ExperimentReport(
        rows=tuple(rows), train_ids=tuple(train_ids), test_ids=tuple(test_ids)
    )
