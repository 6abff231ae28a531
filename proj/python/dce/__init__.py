"""Diversity-aware batch generation engine.

Thin wrapper over the compiled extension. The heavy lifting (campaign loop,
semantic memory, metrics) happens in C++; this package exposes the main
operations for scripting and analysis.
"""

from dce._core import (  # noqa: F401
    AnalysisError,
    ConfigError,
    RunData,
    StorageError,
    category_coherence,
    cluster_count,
    collapse_rate,
    confusion_matrix,
    cosine,
    default_config,
    edv_retention,
    edv_series,
    hdbscan_labels,
    load_run,
    novelty_series,
    per_strategy_stats,
    resume_campaign,
    run_campaign,
    seed_rotation_baseline,
    spearman_rho,
    typicality_correlation,
    vts_filter,
)

__all__ = [
    "AnalysisError",
    "ConfigError",
    "RunData",
    "StorageError",
    "category_coherence",
    "cluster_count",
    "collapse_rate",
    "confusion_matrix",
    "cosine",
    "default_config",
    "edv_retention",
    "edv_series",
    "hdbscan_labels",
    "load_run",
    "novelty_series",
    "per_strategy_stats",
    "resume_campaign",
    "run_campaign",
    "seed_rotation_baseline",
    "spearman_rho",
    "typicality_correlation",
    "vts_filter",
]

__version__ = "0.1.0"
