"""Ranking evaluation: precision, fairness ratio, entropy, and t-based CIs.

Precision follows a tag-overlap rule: a result counts as relevant when it
matches at least a quarter of the query's tags (ceiling, so single-tag
queries need one shared tag). The fairness ratio compares two groups'
counts in the top-k, with 0.5 the equitable optimum; for more than two
groups the entropy of the empirical group distribution applies instead.

Metrics that cannot be computed (untagged query, no grouped results) are
``None`` rather than 0 so aggregates can exclude them explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .catalog import Catalog, EmbeddingItem
from .reranker import RankedResult
from .retrieval import CandidatePool


class MetricsError(ValueError):
    """Raised for invalid metric arguments."""


Ranking = "RankedResult | CandidatePool | Sequence[str]"


def ranking_ids(results) -> tuple[str, ...]:
    """Accept a RankedResult, a CandidatePool, or a plain id sequence."""
    if isinstance(results, (RankedResult, CandidatePool)):
        return results.ids
    return tuple(results)


def tag_match_threshold(query_tags: Sequence[str]) -> int:
    """Minimum shared tags for a result to count as relevant."""
    return max(1, math.ceil(len(query_tags) / 4))


def is_relevant(query_tags: frozenset[str], result_tags: frozenset[str]) -> bool:
    return len(query_tags & result_tags) >= tag_match_threshold(query_tags)


def precision_at_k(
    query: EmbeddingItem, results, catalog: Catalog, k: int
) -> float | None:
    """Fraction of the top-k results matching >= 1/4 of the query's tags.

    Returns ``None`` (undefined, excluded from aggregates) for untagged
    queries. ``k`` clamps to the result length when the list is shorter.
    """
    if not query.tags:
        return None
    ids = ranking_ids(results)[:k]
    if not ids:
        raise MetricsError("empty result list")
    hits = sum(1 for i in ids if is_relevant(query.tags, catalog[i].tags))
    return hits / len(ids)


def group_counts(results, catalog: Catalog, k: int) -> dict[str, int]:
    """Per-group member counts over the top-k. Items in several groups
    count once in each group's tally."""
    counts = {g: 0 for g in catalog.group_mapping.groups}
    for item_id in ranking_ids(results)[:k]:
        for group in catalog[item_id].groups:
            counts[group] += 1
    return counts


def fairness_ratio_at_k(
    results, catalog: Catalog, k: int, groups: tuple[str, str]
) -> float | None:
    """Second group's share of the two groups' combined top-k count.

    Ungrouped results are ignored; ``None`` when neither group appears.
    """
    if len(groups) != 2:
        raise MetricsError("fairness ratio requires exactly 2 groups")
    declared = catalog.group_mapping.groups
    for group in groups:
        if group not in declared:
            raise MetricsError(f"unknown group {group!r}")
    counts = group_counts(results, catalog, k)
    first, second = counts[groups[0]], counts[groups[1]]
    if first + second == 0:
        return None
    return second / (first + second)


def entropy_at_k(results, catalog: Catalog, k: int) -> float | None:
    """Shannon entropy (natural log) of the top-k group distribution;
    ``None`` when no result carries a group. Bounded by ln(G)."""
    if len(catalog.group_mapping.groups) < 2:
        raise MetricsError("entropy requires >= 2 declared groups")
    counts = np.array(
        [c for c in group_counts(results, catalog, k).values() if c > 0],
        dtype=np.float64,
    )
    if counts.size == 0:
        return None
    probs = counts / counts.sum()
    return float(-(probs * np.log(probs)).sum())


@dataclass(frozen=True)
class ConfidenceInterval:
    mean: float
    half_width: float
    confidence: float
    n: int

    def __str__(self) -> str:
        return f"{self.mean:.4f} +/- {self.half_width:.4f}"


def t_confidence_interval(
    samples: Sequence[float], confidence: float = 0.95
) -> ConfidenceInterval:
    """Student-t interval on the mean with n-1 degrees of freedom."""
    if not 0.0 < confidence < 1.0:
        raise MetricsError(f"confidence must be in (0, 1), got {confidence}")
    values = np.asarray(list(samples), dtype=np.float64)
    n = values.size
    if n < 2:
        raise MetricsError("confidence interval requires at least 2 samples")
    sd = float(values.std(ddof=1))
    quantile = float(stats.t.ppf((1.0 + confidence) / 2.0, df=n - 1))
    return ConfidenceInterval(
        mean=float(values.mean()),
        half_width=quantile * sd / math.sqrt(n),
        confidence=confidence,
        n=int(n),
    )


@dataclass(frozen=True)
class QueryEvaluation:
    """All per-query measures for one ranking at a given k."""

    query_id: str
    p_at_k: float | None
    fr_at_k: float | None
    entropy_at_k: float | None
    group_counts: dict[str, int]
    k: int


def evaluate_query(
    query: EmbeddingItem,
    results,
    catalog: Catalog,
    k: int,
    groups: tuple[str, str] | None = None,
) -> QueryEvaluation:
    """Bundle precision, fairness ratio, and entropy for one ranking."""
    if groups is None:
        declared = catalog.group_mapping.groups
        if len(declared) < 2:
            raise MetricsError("need >= 2 declared groups for fairness metrics")
        groups = (declared[0], declared[1])
    return QueryEvaluation(
        query_id=query.id,
        p_at_k=precision_at_k(query, results, catalog, k),
        fr_at_k=fairness_ratio_at_k(results, catalog, k, groups),
        entropy_at_k=entropy_at_k(results, catalog, k),
        group_counts=group_counts(results, catalog, k),
        k=k,
    )
