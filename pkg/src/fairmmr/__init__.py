"""Fairness-aware re-ranking of dense-descriptor retrieval results."""

from .catalog import (
    Catalog,
    CatalogError,
    EmbeddingItem,
    GroupMapping,
    items_in_group,
    load_catalog,
    save_catalog,
)
from .harness import (
    ExperimentSpec,
    SyntheticSpec,
    generate_synthetic,
    run_experiment,
    select_queries,
)
from .metrics import (
    ConfidenceInterval,
    entropy_at_k,
    evaluate_query,
    fairness_ratio_at_k,
    precision_at_k,
    t_confidence_interval,
)
from .representations import (
    FairnessRepresentation,
    RepresentationSet,
    build_representations,
    sample_count,
)
from .reranker import (
    GreedyReranker,
    RankedResult,
    RerankConfig,
    classic_sim,
    fsim,
    rerank,
)
from .retrieval import CandidatePool, ScoredCandidate, distance, knn
from .tuning import (
    TuningConfig,
    TuningResult,
    best_lambda_for_query,
    matched_fairness_lambda,
    tune,
)

__all__ = [
    "Catalog",
    "CatalogError",
    "EmbeddingItem",
    "GroupMapping",
    "items_in_group",
    "load_catalog",
    "save_catalog",
    "ExperimentSpec",
    "SyntheticSpec",
    "generate_synthetic",
    "run_experiment",
    "select_queries",
    "ConfidenceInterval",
    "entropy_at_k",
    "evaluate_query",
    "fairness_ratio_at_k",
    "precision_at_k",
    "t_confidence_interval",
    "FairnessRepresentation",
    "RepresentationSet",
    "build_representations",
    "sample_count",
    "GreedyReranker",
    "RankedResult",
    "RerankConfig",
    "classic_sim",
    "fsim",
    "rerank",
    "CandidatePool",
    "ScoredCandidate",
    "distance",
    "knn",
    "TuningConfig",
    "TuningResult",
    "best_lambda_for_query",
    "matched_fairness_lambda",
    "tune",
]
