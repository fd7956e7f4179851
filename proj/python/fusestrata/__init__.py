# SPDX-License-Identifier: Apache-2.0
"""Multimodal volume fusion and stratification.

Config-driven stage wrappers mirror the ``fusestrata`` command-line
subcommands (synth, train, embed, metrics, cross_validate, cluster, factors,
stats, profile, pipeline); the numeric core (Kruskal-Wallis, FDR, Varimax,
affinity propagation, profiles) is also exposed directly on numpy arrays.
"""

from ._core import (
    PipelineError,
    adjusted_rand_index,
    affinity_propagation,
    bh_fdr,
    cluster,
    cluster_profiles,
    cross_validate,
    derive_seed,
    embed,
    factors,
    fit_factors,
    grid_search,
    kruskal_wallis,
    metrics,
    model_geometry,
    normdiff_scalar,
    params,
    pipeline,
    profile,
    silhouette,
    similarity_matrix,
    stats,
    stratification_stats,
    synth,
    train,
    varimax,
    varimax_criterion,
)

__all__ = [
    "PipelineError",
    "adjusted_rand_index",
    "affinity_propagation",
    "bh_fdr",
    "cluster",
    "cluster_profiles",
    "cross_validate",
    "derive_seed",
    "embed",
    "factors",
    "fit_factors",
    "grid_search",
    "kruskal_wallis",
    "metrics",
    "model_geometry",
    "normdiff_scalar",
    "params",
    "pipeline",
    "profile",
    "silhouette",
    "similarity_matrix",
    "stats",
    "stratification_stats",
    "synth",
    "train",
    "varimax",
    "varimax_criterion",
]
