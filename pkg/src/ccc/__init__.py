"""
Constant-conditional-correlation test: partitions, leaf statistics,
covariance estimators and the penalized statistic.
"""

from .partition import (
    Condition,
    Partition,
    axis_values,
    whole_support,
    median_partition,
    product_median_partition
)
from .stats import GroupStats, group_stats, corr_variance_star, star_covariance, checked_solve
from .sandwich import EdgeSandwich, SandwichParts, sandwich_covariance, edge_data
from .statistic import (
    CovMode,
    TestOutcome,
    PenaltyRecord,
    statistic_fixed,
    statistic_avg_form,
    bootstrap_covariance,
    combine_with_penalty,
    quadratic_form,
    quadratic_form_avg,
    difference_matrix,
    chi2_quantile,
    chi2_sf,
    penalty_bound,
    default_penalty
)

__all__ = [
    "Condition", "Partition", "axis_values", "whole_support", "median_partition", "product_median_partition",
    "GroupStats", "group_stats", "corr_variance_star", "star_covariance", "checked_solve",
    "EdgeSandwich", "SandwichParts", "sandwich_covariance", "edge_data",
    "CovMode", "TestOutcome", "PenaltyRecord", "statistic_fixed", "statistic_avg_form",
    "bootstrap_covariance", "combine_with_penalty", "quadratic_form", "quadratic_form_avg",
    "difference_matrix", "chi2_quantile", "chi2_sf", "penalty_bound", "default_penalty"
]
