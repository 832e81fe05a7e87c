"""
Greedy decision-tree search for the partition of the conditioning support
that maximizes the CCC statistic.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .ccc.partition import Axis, Condition, Partition, as_matrix, axis_values
from .ccc.statistic import quadratic_form
from .ccc.stats import group_stats, star_covariance
from .constants import AXIS_MEAN, DEFAULT_MIN_LEAF, SPLIT_QUANTILES
from .exceptions import DegenerateDataError, DomainError, NumericError, PartitionError

logger = logging.getLogger("SVCT.Tree")

@dataclass(frozen=True, eq=False)
class Leaf:
    """A node of the tree: its path from the root, its predicate and its members"""

    path: Tuple[str, ...]
    conditions: Tuple[Condition, ...]
    members: np.ndarray

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def depth(self) -> int:
        return len(self.path) - 1

    @classmethod
    def root(cls, n: int) -> "Leaf":
        return cls(("0",), (), np.arange(n))

@dataclass(frozen=True)
class SplitCandidate:
    axis: Axis
    quantile: float
    threshold: float

    def condition(self) -> Condition:
        return Condition(self.axis, self.threshold, "le")

def _axis_rank(axis: Axis, p: int) -> int:
    return p if axis == AXIS_MEAN else int(axis)

def split_candidates(leaf: Leaf, cond: np.ndarray, min_leaf: int = DEFAULT_MIN_LEAF) -> List[SplitCandidate]:
    """Quartile splits of each conditioning column (and of their mean when there are
    at least two) whose children both keep ``min_leaf`` members.

    Leaves with fewer than ``4 * min_leaf`` members only try the median.
    """
    cond = as_matrix(cond)
    p = cond.shape[1]
    sub = cond[leaf.members]
    axes: List[Axis] = list(range(p)) + ([AXIS_MEAN] if p >= 2 else [])
    quantiles: Sequence[float] = SPLIT_QUANTILES if leaf.size >= 4 * min_leaf else (0.5,)

    candidates = []
    for axis in axes:
        values = axis_values(sub, axis)
        seen = set()
        for q in quantiles:
            threshold = float(np.quantile(values, q))
            if threshold in seen:
                continue
            seen.add(threshold)
            left = int(np.count_nonzero(values <= threshold))
            if left >= min_leaf and leaf.size - left >= min_leaf:
                candidates.append(SplitCandidate(axis, q, threshold))
    return candidates

def two_group_statistic(x: np.ndarray, y: np.ndarray, cond: np.ndarray, condition: Condition) -> float:
    """Oracle CCC statistic of the split ``condition`` / not ``condition``"""
    part = Partition(((condition,), (condition.negate(),)))
    stats = group_stats(x, y, cond, part)
    return quadratic_form(stats.corr, star_covariance(stats), stats.n)

def best_split(leaf: Leaf, x: np.ndarray, y: np.ndarray, cond: np.ndarray,
               candidates: Sequence[SplitCandidate]) -> Optional[Tuple[SplitCandidate, float]]:
    """The candidate maximizing the two-group statistic on the leaf's members.

    Ties go to the lowest axis (the mean counts after every column), then the
    lowest quantile. Candidates with degenerate children are skipped.
    """
    cond = as_matrix(cond)
    p = cond.shape[1]
    members = leaf.members
    xs, ys, cs = np.asarray(x)[members], np.asarray(y)[members], cond[members]

    best: Optional[Tuple[SplitCandidate, float]] = None
    for candidate in sorted(candidates, key=lambda c: (_axis_rank(c.axis, p), c.quantile)):
        try:
            value = two_group_statistic(xs, ys, cs, candidate.condition())
        except (PartitionError, DegenerateDataError, NumericError) as e:
            logger.debug(f"Skipping split {candidate}: {e}")
            continue
        if best is None or value > best[1]:
            best = (candidate, value)
    return best

def partition_statistic(x: np.ndarray, y: np.ndarray, cond: np.ndarray, part: Partition) -> float:
    stats = group_stats(x, y, cond, part)
    return quadratic_form(stats.corr, star_covariance(stats), stats.n)

def _split(leaf: Leaf, candidate: SplitCandidate, cond: np.ndarray) -> Tuple[Leaf, Leaf]:
    condition = candidate.condition()
    inside = condition.holds(cond[leaf.members])
    return (Leaf(leaf.path + ("l",), leaf.conditions + (condition,), leaf.members[inside]),
            Leaf(leaf.path + ("r",), leaf.conditions + (condition.negate(),), leaf.members[~inside]))

def grow(x: np.ndarray, y: np.ndarray, cond: np.ndarray, j_max: int = 2,
         min_leaf: int = DEFAULT_MIN_LEAF, null_partition: Optional[Partition] = None) -> Optional[Partition]:
    """Grow the tree breadth first to depth ``j_max``.

    A level is kept only when the oracle statistic of the refined partition
    does not fall below that of the previous level. Without any root split
    ``null_partition`` is returned.
    """
    if j_max < 1:
        raise DomainError("maximum depth must be at least 1", parameter="j_max", value=j_max)
    cond = as_matrix(cond)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)

    leaves = [Leaf.root(len(x))]
    current: Optional[Partition] = None
    current_stat = -np.inf
    for depth in range(1, j_max + 1):
        next_leaves: List[Leaf] = []
        split_any = False
        for leaf in leaves:
            choice = best_split(leaf, x, y, cond, split_candidates(leaf, cond, min_leaf))
            if choice is None:
                next_leaves.append(leaf)
                continue
            split_any = True
            logger.debug(f"Depth {depth}: split leaf {''.join(leaf.path)} on {choice[0].condition()} "
                         f"(statistic {choice[1]:.3f})")
            next_leaves.extend(_split(leaf, choice[0], cond))
        if not split_any:
            break

        candidate = Partition(tuple(leaf.conditions for leaf in next_leaves))
        try:
            stat = partition_statistic(x, y, cond, candidate)
        except (PartitionError, DegenerateDataError, NumericError) as e:
            logger.debug(f"Depth {depth} rejected: {e}")
            break
        if stat < current_stat:
            logger.debug(f"Depth {depth} lowers the statistic ({stat:.3f} < {current_stat:.3f}); stopping")
            break
        leaves, current, current_stat = next_leaves, candidate, stat

    if current is None:
        logger.debug("No admissible root split; falling back to the null partition")
        return null_partition
    return current
