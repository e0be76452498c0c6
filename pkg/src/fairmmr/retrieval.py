"""Exact nearest-neighbor retrieval over the catalog.

Relevance is the negative distance between the query descriptor and each
item, so higher is better. The corpus sizes this toolkit targets (a few
thousand items) make brute-force search both simpler and easier to verify
than an approximate index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import Catalog

METRICS = ("euclidean", "manhattan")


class RetrievalError(ValueError):
    """Raised on dimension mismatches or invalid retrieval arguments."""


def distance(u: np.ndarray, v: np.ndarray, metric: str = "euclidean") -> float:
    """L2 or L1 distance between two equal-dimension vectors."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise RetrievalError(f"dimension mismatch: {u.shape} vs {v.shape}")
    diff = u - v
    if metric == "euclidean":
        return float(np.sqrt(np.dot(diff, diff)))
    if metric == "manhattan":
        return float(np.abs(diff).sum())
    raise RetrievalError(f"unknown metric {metric!r}")


def distances_to(matrix: np.ndarray, query: np.ndarray, metric: str) -> np.ndarray:
    """Row-wise distance from every row of ``matrix`` to ``query``."""
    diff = matrix - query
    if metric == "euclidean":
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))
    if metric == "manhattan":
        return np.abs(diff).sum(axis=1)
    raise RetrievalError(f"unknown metric {metric!r}")


@dataclass(frozen=True)
class ScoredCandidate:
    id: str
    relevance: float  # always -distance
    distance: float


@dataclass(frozen=True)
class CandidatePool:
    """Relevance-sorted candidate list handed to the re-ranker.

    Sorted by relevance descending; ties broken by id ascending. When the
    query is an in-catalog item it is excluded from its own pool.
    """

    query_id: str | None
    candidates: tuple[ScoredCandidate, ...]
    pool_size: int

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.candidates)

    def __len__(self) -> int:
        return len(self.candidates)


def knn(
    catalog: Catalog,
    query_vector: np.ndarray,
    pool_size: int,
    metric: str = "euclidean",
    exclude: str | None = None,
) -> CandidatePool:
    """Exact KNN: the ``pool_size`` nearest items under the metric.

    Deterministic under distance ties (id ascending). ``exclude`` removes
    an in-catalog query from its own result pool.
    """
    if pool_size < 1:
        raise RetrievalError("pool_size must be >= 1")
    query = np.asarray(query_vector, dtype=np.float64)
    if query.shape != (catalog.dimension,):
        raise RetrievalError(
            f"query dimension {query.shape} does not match catalog "
            f"dimension {catalog.dimension}"
        )
    dists = distances_to(catalog.matrix, query, metric)
    order = sorted(
        (i for i, item_id in enumerate(catalog.ids) if item_id != exclude),
        key=lambda i: (dists[i], catalog.ids[i]),
    )
    chosen = order[: min(pool_size, len(order))]
    candidates = tuple(
        ScoredCandidate(
            id=catalog.ids[i],
            relevance=-float(dists[i]),
            distance=float(dists[i]),
        )
        for i in chosen
    )
    return CandidatePool(query_id=exclude, candidates=candidates, pool_size=pool_size)
