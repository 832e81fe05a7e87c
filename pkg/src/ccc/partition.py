"""
Partitions of the conditioning support into leaves.

A leaf is a conjunction of threshold conditions. Each condition looks at one
conditioning column (0-based index into the conditioning matrix) or at the
row mean of all conditioning columns (``"mean"``).
"""
import json
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np

from ..constants import AXIS_MEAN
from ..exceptions import PartitionError, ValidationError

Axis = Union[int, str]

def as_matrix(cond: np.ndarray) -> np.ndarray:
    cond = np.asarray(cond, dtype=float)
    return cond[:, None] if cond.ndim == 1 else cond

def axis_values(cond: np.ndarray, axis: Axis) -> np.ndarray:
    """Column ``axis`` of ``cond``, or the row means for the mean aggregation"""
    cond = as_matrix(cond)
    if axis == AXIS_MEAN:
        return cond.mean(axis=1)
    if not 0 <= int(axis) < cond.shape[1]:
        raise PartitionError(f"axis {axis} outside the {cond.shape[1]} conditioning columns")
    return cond[:, int(axis)]

@dataclass(frozen=True)
class Condition:
    """``value <= threshold`` (side "le") or ``value > threshold`` (side "gt")"""

    axis: Axis
    threshold: float
    side: str = "le"

    def __post_init__(self):
        if self.side not in ("le", "gt"):
            raise ValidationError(f"condition side must be 'le' or 'gt', got '{self.side}'", field_name="side")
        if self.axis != AXIS_MEAN:
            object.__setattr__(self, "axis", int(self.axis))
        object.__setattr__(self, "threshold", float(self.threshold))

    def holds(self, cond: np.ndarray) -> np.ndarray:
        values = axis_values(cond, self.axis)
        return values <= self.threshold if self.side == "le" else values > self.threshold

    def negate(self) -> "Condition":
        return Condition(self.axis, self.threshold, "gt" if self.side == "le" else "le")

    def to_dict(self) -> Dict[str, Any]:
        return {"axis": self.axis, "threshold": self.threshold, "side": self.side}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Condition":
        return cls(data["axis"], data["threshold"], data.get("side", "le"))

    def __str__(self) -> str:
        name = "mean" if self.axis == AXIS_MEAN else f"c{self.axis}"
        return f"{name} {'<=' if self.side == 'le' else '>'} {self.threshold:.4g}"

Leaf = Tuple[Condition, ...]

@dataclass(frozen=True)
class Partition:
    """Ordered leaves; every observation falls in at most one leaf"""

    leaves: Tuple[Leaf, ...]

    def __post_init__(self):
        leaves = tuple(tuple(leaf) for leaf in self.leaves)
        if not leaves:
            raise PartitionError("a partition needs at least one leaf")
        object.__setattr__(self, "leaves", leaves)

    @property
    def L(self) -> int:
        return len(self.leaves)

    def masks(self, cond: np.ndarray) -> np.ndarray:
        """n x L membership matrix

        Raises:
            PartitionError: If an observation falls in two leaves
        """
        cond = as_matrix(cond)
        masks = np.ones((cond.shape[0], self.L), dtype=bool)
        for l, leaf in enumerate(self.leaves):
            for condition in leaf:
                masks[:, l] &= condition.holds(cond)
        overlap = masks.sum(axis=1) > 1
        if overlap.any():
            raise PartitionError(f"{int(overlap.sum())} observations fall in more than one leaf")
        return masks

    def assign(self, cond: np.ndarray) -> np.ndarray:
        """Leaf index per observation, -1 where no leaf applies"""
        masks = self.masks(cond)
        return np.where(masks.any(axis=1), masks.argmax(axis=1), -1)

    def reordered(self, order: Sequence[int]) -> "Partition":
        if sorted(order) != list(range(self.L)):
            raise ValidationError(f"{list(order)} is not a permutation of the leaves", field_name="order")
        return Partition(tuple(self.leaves[l] for l in order))

    def refine(self, leaf: int, condition: Condition) -> "Partition":
        """Split one leaf in two along ``condition`` and its negation"""
        base = self.leaves[leaf]
        children = (base + (condition,), base + (condition.negate(),))
        return Partition(self.leaves[:leaf] + children + self.leaves[leaf + 1:])

    def to_dict(self) -> Dict[str, Any]:
        return {"leaves": [[c.to_dict() for c in leaf] for leaf in self.leaves]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Partition":
        try:
            return cls(tuple(tuple(Condition.from_dict(c) for c in leaf) for leaf in data["leaves"]))
        except (KeyError, TypeError) as e:
            raise ValidationError(f"malformed partition: {e}", field_name="partition")

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Partition":
        return cls.from_dict(json.loads(text))

    def describe(self) -> List[str]:
        return [" and ".join(str(c) for c in leaf) or "all" for leaf in self.leaves]

def whole_support() -> Partition:
    """The single leaf containing every observation"""
    return Partition(((),))

def median_partition(cond: np.ndarray) -> Partition:
    """Median split of the mean of the conditioning columns (the column itself when there is one)"""
    cond = as_matrix(cond)
    axis: Axis = AXIS_MEAN if cond.shape[1] >= 2 else 0
    threshold = float(np.median(axis_values(cond, axis)))
    return whole_support().refine(0, Condition(axis, threshold, "le"))

def product_median_partition(cond: np.ndarray) -> Partition:
    """Intersection of the per-column median splits: 2^p leaves for p columns"""
    cond = as_matrix(cond)
    partition = whole_support()
    for axis in range(cond.shape[1]):
        threshold = float(np.median(cond[:, axis]))
        for leaf in reversed(range(partition.L)):
            partition = partition.refine(leaf, Condition(axis, threshold, "le"))
    return partition
