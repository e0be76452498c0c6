"""Greedy marginal-gain re-ranking with pluggable similarity kernels.

At each step the engine picks the unselected candidate maximizing

    lambda * relevance + (1 - lambda) * gain,

where ``gain`` is the negated maximum kernel similarity to the items
already selected (0 for the first pick). Both kernels express similarity
as a negated distance, so the gain is equivalently the candidate's
minimum kernel *distance* to the selected set:

    classic_mmr   kernel distance = metric distance between descriptors
    fmmr          kernel distance = L1 distance between the candidates'
                  distance profiles to the group fairness representations

The fairness kernel therefore rewards candidates whose relation to the
demographic groups differs most from everything chosen so far.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .catalog import Catalog
from .representations import RepresentationSet
from .retrieval import CandidatePool, distance, distances_to

KERNELS = ("classic_mmr", "fmmr")


class RerankError(ValueError):
    """Raised for invalid re-ranking configurations."""


@dataclass(frozen=True)
class RerankConfig:
    """Re-ranking parameters.

    Tie-breaking is fixed (objective descending, then id ascending) so
    runs are reproducible. ``normalize`` min-max scales relevance and the
    kernel gain to [0, 1] per pool; it is off by default because the raw
    unnormalized combination is the reference behavior.
    """

    lam: float
    k: int
    kernel: str = "fmmr"
    metric: str = "euclidean"
    normalize: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.lam <= 1.0:
            raise RerankError(f"lambda must be in [0, 1], got {self.lam}")
        if self.k < 1:
            raise RerankError(f"k must be >= 1, got {self.k}")
        if self.kernel not in KERNELS:
            raise RerankError(f"unknown kernel {self.kernel!r}")


@dataclass(frozen=True)
class RankedEntry:
    id: str
    objective_score: float
    relevance: float
    diversity_gain: float


@dataclass(frozen=True)
class RankedResult:
    """Selected items in pick order with per-step score breakdowns."""

    entries: tuple[RankedEntry, ...]
    truncated: bool = False  # k exceeded the pool size

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def classic_sim(x: np.ndarray, y: np.ndarray, metric: str = "euclidean") -> float:
    """Pairwise similarity as negated distance; near-duplicates score
    close to 0, distant items strongly negative."""
    return -distance(x, y, metric)


def fsim(
    x: np.ndarray,
    y: np.ndarray,
    reps: RepresentationSet,
    metric: str = "euclidean",
) -> float:
    """Fairness similarity: negated L1 distance between the two items'
    distance profiles over the group representations.

    Always <= 0; equals 0 exactly when both items sit at identical
    distances from every representation, i.e. contribute identically to
    each group's presence.
    """
    if len(reps) == 0:
        raise RerankError("fsim requires a non-empty representation set")
    total = 0.0
    for rep in reps.reps:
        total -= abs(distance(x, rep.vector, metric) - distance(y, rep.vector, metric))
    return total


class GreedyReranker:
    """Reusable greedy engine over one candidate pool.

    Precomputes the pool's relevance vector and kernel geometry once, so
    a grid of lambda values can be swept cheaply against the same pool.
    """

    def __init__(
        self,
        pool: CandidatePool,
        catalog: Catalog,
        reps: RepresentationSet | None = None,
        kernel: str = "fmmr",
        metric: str = "euclidean",
        normalize: bool = False,
    ) -> None:
        if len(pool) == 0:
            raise RerankError("candidate pool is empty")
        if kernel not in KERNELS:
            raise RerankError(f"unknown kernel {kernel!r}")
        if kernel == "fmmr" and reps is None:
            raise RerankError("fmmr kernel requires a representation set")
        self.kernel = kernel
        self.metric = metric
        # Canonical candidate order: relevance descending, id ascending.
        ordered = sorted(pool.candidates, key=lambda c: (-c.relevance, c.id))
        self.ids = [c.id for c in ordered]
        self.relevance = np.array([c.relevance for c in ordered], dtype=np.float64)
        self.vectors = np.stack([catalog[c.id].vector for c in ordered])
        if kernel == "fmmr":
            assert reps is not None
            # n x G matrix of distances to each group representation.
            self.profiles = np.stack(
                [distances_to(self.vectors, r.vector, metric) for r in reps.reps],
                axis=1,
            )
        else:
            self.profiles = None
        self._rel_used = self.relevance
        self._gain_scale = 1.0
        if normalize:
            rel_span = self.relevance.max() - self.relevance.min()
            self._rel_used = (
                (self.relevance - self.relevance.min()) / rel_span
                if rel_span > 0
                else np.zeros_like(self.relevance)
            )
            max_kd = self._max_pairwise_kernel_distance()
            self._gain_scale = 1.0 / max_kd if max_kd > 0 else 1.0

    def _kernel_distances_to(self, index: int) -> np.ndarray:
        """Kernel distance from every candidate to candidate ``index``."""
        if self.kernel == "fmmr":
            return np.abs(self.profiles - self.profiles[index]).sum(axis=1)
        return distances_to(self.vectors, self.vectors[index], self.metric)

    def _max_pairwise_kernel_distance(self) -> float:
        best = 0.0
        for i in range(len(self.ids)):
            best = max(best, float(self._kernel_distances_to(i).max()))
        return best

    def select(self, lam: float, k: int) -> RankedResult:
        if not 0.0 <= lam <= 1.0:
            raise RerankError(f"lambda must be in [0, 1], got {lam}")
        n = len(self.ids)
        take = min(k, n)
        selected_mask = np.zeros(n, dtype=bool)
        # Minimum kernel distance from each candidate to the selected set;
        # +inf means "nothing selected yet" and maps to a gain of 0.
        min_kd = np.full(n, np.inf)
        entries = []
        for _ in range(take):
            gains = np.where(np.isfinite(min_kd), min_kd * self._gain_scale, 0.0)
            objective = lam * self._rel_used + (1.0 - lam) * gains
            objective[selected_mask] = -np.inf
            best_value = objective.max()
            tied = np.flatnonzero(objective == best_value)
            pick = min(tied, key=lambda i: self.ids[i])
            selected_mask[pick] = True
            entries.append(
                RankedEntry(
                    id=self.ids[pick],
                    objective_score=float(best_value),
                    relevance=float(self._rel_used[pick]),
                    diversity_gain=float(gains[pick]),
                )
            )
            min_kd = np.minimum(min_kd, self._kernel_distances_to(pick))
        return RankedResult(entries=tuple(entries), truncated=k > n)


def rerank(
    pool: CandidatePool,
    catalog: Catalog,
    reps: RepresentationSet | None,
    config: RerankConfig,
) -> RankedResult:
    """Greedy re-ranking of a candidate pool under the configured kernel.

    ``k`` larger than the pool returns the whole pool reranked, flagged
    as truncated rather than raising.
    """
    engine = GreedyReranker(
        pool,
        catalog,
        reps=reps,
        kernel=config.kernel,
        metric=config.metric,
        normalize=config.normalize,
    )
    return engine.select(config.lam, config.k)
