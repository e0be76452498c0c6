"""Grid search for the relevance/fairness trade-off parameter.

The search optimizes fairness while satisficing precision: only lambdas
whose p@k stays within a relative degradation ``d`` of the pure-relevance
baseline are feasible, and among those the one with the best fairness
wins (ties go to the larger lambda, i.e. more relevance). Per-query best
lambdas are then averaged into one overall operating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .catalog import Catalog, EmbeddingItem
from .metrics import entropy_at_k, fairness_ratio_at_k, precision_at_k
from .representations import RepresentationSet
from .reranker import GreedyReranker
from .retrieval import knn

# Feasibility slack for float round-off in the precision comparison only.
_EPS = 1e-12


class TuningError(ValueError):
    """Raised for invalid tuning configurations or untunable query sets."""


@dataclass(frozen=True)
class TuningConfig:
    """Grid-search settings.

    The grid is ``grid_size`` evenly spaced points covering [0, 1):
    0 included, 1 excluded. The lambda = 1 baseline is computed separately
    as the degradation reference.
    """

    grid_size: int = 50
    degradation_ratio: float = 0.25
    k: int = 10
    pool_size: int = 50
    metric: str = "euclidean"
    normalize: bool = False
    groups: tuple[str, str] | None = None  # default: first two declared

    def __post_init__(self) -> None:
        if self.grid_size < 1:
            raise TuningError("grid_size must be >= 1")
        if not 0.0 <= self.degradation_ratio <= 1.0:
            raise TuningError("degradation ratio must be in [0, 1]")

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.grid_size, endpoint=False)


@dataclass(frozen=True)
class CurvePoint:
    lam: float
    p_at_k: float | None
    fr_at_k: float | None
    entropy_at_k: float | None
    feasible: bool


@dataclass(frozen=True)
class QueryTuning:
    query_id: str
    best_lambda: float
    baseline_precision: float
    constraint_binding: bool  # no grid lambda met the precision floor
    curve: tuple[CurvePoint, ...]


@dataclass(frozen=True)
class TuningResult:
    per_query: dict[str, QueryTuning]
    overall_lambda: float
    skipped: tuple[str, ...]

    @property
    def per_query_best_lambda(self) -> dict[str, float]:
        return {qid: qt.best_lambda for qid, qt in self.per_query.items()}


def _resolve_groups(catalog: Catalog, tuning: TuningConfig) -> tuple[str, str] | None:
    if tuning.groups is not None:
        return tuning.groups
    declared = catalog.group_mapping.groups
    if len(declared) == 2:
        return (declared[0], declared[1])
    return None  # >2 groups: entropy drives the fairness objective


def _fairness_badness(point: CurvePoint, pair: tuple[str, str] | None) -> float:
    """Lower is fairer: |fr - 0.5| for two groups, -entropy otherwise.
    Undefined fairness is worst."""
    if pair is not None:
        if point.fr_at_k is None:
            return np.inf
        return abs(point.fr_at_k - 0.5)
    if point.entropy_at_k is None:
        return np.inf
    return -point.entropy_at_k


def query_engine(
    query: EmbeddingItem,
    catalog: Catalog,
    reps: RepresentationSet | None,
    tuning: TuningConfig,
    kernel: str,
) -> GreedyReranker:
    """KNN pool + greedy engine for one in-catalog query."""
    pool = knn(
        catalog,
        query.vector,
        tuning.pool_size,
        metric=tuning.metric,
        exclude=query.id if query.id in catalog else None,
    )
    return GreedyReranker(
        pool,
        catalog,
        reps=reps,
        kernel=kernel,
        metric=tuning.metric,
        normalize=tuning.normalize,
    )


def best_lambda_for_query(
    query: EmbeddingItem,
    catalog: Catalog,
    reps: RepresentationSet | None,
    tuning: TuningConfig,
    kernel: str = "fmmr",
) -> QueryTuning:
    """Sweep the lambda grid for one query and pick the fairest feasible
    point.

    Feasible means p@k >= (1 - d) * p@k(lambda=1). If nothing on the grid
    qualifies the query falls back to lambda = 1 with the constraint
    flagged as binding, keeping the averaging protocol total.
    """
    if not query.tags:
        raise TuningError(f"query {query.id!r} has no tags; precision undefined")
    pair = _resolve_groups(catalog, tuning)
    engine = query_engine(query, catalog, reps, tuning, kernel)
    baseline = engine.select(1.0, tuning.k)
    baseline_p = precision_at_k(query, baseline, catalog, tuning.k)
    assert baseline_p is not None
    floor = (1.0 - tuning.degradation_ratio) * baseline_p

    curve = []
    for lam in tuning.grid():
        result = engine.select(float(lam), tuning.k)
        p = precision_at_k(query, result, catalog, tuning.k)
        fr = (
            fairness_ratio_at_k(result, catalog, tuning.k, pair)
            if pair is not None
            else None
        )
        ent = entropy_at_k(result, catalog, tuning.k)
        feasible = p is not None and p >= floor - _EPS
        curve.append(
            CurvePoint(
                lam=float(lam), p_at_k=p, fr_at_k=fr, entropy_at_k=ent,
                feasible=feasible,
            )
        )

    best: CurvePoint | None = None
    best_badness = np.inf
    for point in curve:
        if not point.feasible:
            continue
        badness = _fairness_badness(point, pair)
        # <= keeps the larger lambda on ties (grid is ascending).
        if badness <= best_badness:
            best, best_badness = point, badness
    if best is None:
        return QueryTuning(
            query_id=query.id,
            best_lambda=1.0,
            baseline_precision=baseline_p,
            constraint_binding=True,
            curve=tuple(curve),
        )
    return QueryTuning(
        query_id=query.id,
        best_lambda=best.lam,
        baseline_precision=baseline_p,
        constraint_binding=False,
        curve=tuple(curve),
    )


def tune(
    queries: list[EmbeddingItem],
    catalog: Catalog,
    reps: RepresentationSet | None,
    tuning: TuningConfig,
    kernel: str = "fmmr",
) -> TuningResult:
    """Per-query grid search, averaged into one overall lambda.

    Queries whose precision is undefined (no tags) are skipped and
    reported; it is an error for every query to be skipped.
    """
    per_query: dict[str, QueryTuning] = {}
    skipped = []
    for query in queries:
        if not query.tags:
            skipped.append(query.id)
            continue
        per_query[query.id] = best_lambda_for_query(
            query, catalog, reps, tuning, kernel
        )
    if not per_query:
        raise TuningError("no tunable queries (all skipped)")
    overall = float(
        np.mean([qt.best_lambda for qt in per_query.values()])
    )
    return TuningResult(
        per_query=per_query, overall_lambda=overall, skipped=tuple(skipped)
    )


@dataclass(frozen=True)
class MatchedLambda:
    lam: float
    mean_fr: float
    target_fr: float


def matched_fairness_lambda(
    queries: list[EmbeddingItem],
    catalog: Catalog,
    tuning: TuningConfig,
    target_fr: float,
) -> MatchedLambda:
    """Classic-kernel grid lambda whose mean fr@k is closest to a target.

    Used to build a like-for-like baseline: run the plain pairwise-
    similarity kernel at comparable fairness and compare precision.
    """
    if not 0.0 <= target_fr <= 1.0:
        raise TuningError(f"target_fr must be in [0, 1], got {target_fr}")
    pair = _resolve_groups(catalog, tuning)
    if pair is None:
        raise TuningError("fairness-ratio matching requires exactly 2 groups")
    engines = [
        query_engine(q, catalog, None, tuning, "classic_mmr") for q in queries
    ]
    best_lam, best_mean, best_gap = 1.0, np.inf, np.inf
    for lam in tuning.grid():
        frs = []
        for engine in engines:
            result = engine.select(float(lam), tuning.k)
            fr = fairness_ratio_at_k(result, catalog, tuning.k, pair)
            if fr is not None:
                frs.append(fr)
        if not frs:
            continue
        mean_fr = float(np.mean(frs))
        gap = abs(mean_fr - target_fr)
        if gap <= best_gap:  # ties favor the larger lambda
            best_lam, best_mean, best_gap = float(lam), mean_fr, gap
    if not np.isfinite(best_gap):
        raise TuningError("fairness ratio undefined for every query and lambda")
    return MatchedLambda(lam=best_lam, mean_fr=best_mean, target_fr=target_fr)
