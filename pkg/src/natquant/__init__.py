"""Exact optimal quantization of discrete distributions on the natural numbers."""

from .measure import (
    DiscreteDistribution,
    GeometricTail,
    MomentTriple,
    av,
    block_moments,
    er,
    global_mean_and_v1,
    make_definition_distribution,
    make_distribution,
    tail_moments,
    validate,
)
from .solver import (
    BlockPartition,
    SolveResult,
    SolverConfig,
    brute_force_n_means,
    distortion,
    solve_n_means,
    verify_centroid_condition,
    verify_voronoi_consistency,
)

__all__ = [
    "BlockPartition",
    "DiscreteDistribution",
    "GeometricTail",
    "MomentTriple",
    "SolveResult",
    "SolverConfig",
    "av",
    "block_moments",
    "brute_force_n_means",
    "distortion",
    "er",
    "global_mean_and_v1",
    "make_definition_distribution",
    "make_distribution",
    "solve_n_means",
    "tail_moments",
    "validate",
    "verify_centroid_condition",
    "verify_voronoi_consistency",
]
