"""
Decision-tree CCC test of single edges and the hierarchical procedure over
all edges of a D-vine with a Bonferroni-corrected level.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from .ccc.partition import Partition, as_matrix, median_partition
from .ccc.sandwich import EdgeSandwich, edge_data
from .ccc.statistic import CovMode, TestOutcome, combine_with_penalty, default_penalty, statistic_fixed
from .constants import (
    COV_KNOWN_MARGINS, COV_SANDWICH, DEFAULT_ALPHA, DEFAULT_J_MAX, DEFAULT_MIN_LEAF, DEFAULT_PENALTY_BETA,
    DEFAULT_PENALTY_C
)
from .dvine.fit import FittedTrees, stepwise_fit
from .dvine.model import Edge, FamilySpec
from .dvine.sample import PseudoSample
from .error_handler import ErrorContext
from .exceptions import DomainError, NumericError
from .tree import grow

logger = logging.getLogger("SVCT.Hier")

@dataclass(frozen=True)
class HierConfig:
    """Settings of the edge test and of the hierarchical procedure"""

    alpha: float = DEFAULT_ALPHA
    families: FamilySpec = "clayton"
    j_max: int = DEFAULT_J_MAX
    min_leaf: int = DEFAULT_MIN_LEAF
    penalty_c: float = DEFAULT_PENALTY_C
    penalty_beta: float = DEFAULT_PENALTY_BETA
    lambda_n: Optional[float] = None
    cov: CovMode = field(default_factory=CovMode.sandwich)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)", parameter="alpha", value=self.alpha)
        if self.j_max < 1:
            raise DomainError("j_max must be at least 1", parameter="j_max", value=self.j_max)
        if self.min_leaf < 2:
            raise DomainError("min_leaf must be at least 2", parameter="min_leaf", value=self.min_leaf)

    def penalty(self, n: int) -> float:
        if self.lambda_n is not None:
            return float(self.lambda_n)
        return default_penalty(n, self.penalty_c, self.penalty_beta)

    @classmethod
    def from_config(cls, test_config: Dict[str, Any], families: FamilySpec, **overrides) -> "HierConfig":
        """Build from the ``test`` section of :class:`src.config.Config`"""
        cov = CovMode(test_config.get("cov_mode", "sandwich"),
                      reps=int(test_config.get("bootstrap_reps", 500)),
                      seed=int(test_config.get("bootstrap_seed", 1)))
        settings = dict(alpha=float(test_config.get("alpha", DEFAULT_ALPHA)), families=families,
                        j_max=int(test_config.get("j_max", DEFAULT_J_MAX)),
                        min_leaf=int(test_config.get("min_leaf", DEFAULT_MIN_LEAF)),
                        penalty_c=float(test_config.get("penalty_c", DEFAULT_PENALTY_C)),
                        penalty_beta=float(test_config.get("penalty_beta", DEFAULT_PENALTY_BETA)),
                        cov=cov)
        settings.update(overrides)
        return cls(**settings)

@dataclass(frozen=True, eq=False)
class EdgeTest:
    """Penalized outcome of one edge together with the fixed-partition outcome"""

    edge: Optional[Edge]
    penalized: TestOutcome
    fixed: TestOutcome
    gamma_max: Optional[Partition]

    def to_dict(self) -> Dict[str, Any]:
        return {"edge": list(self.edge) if self.edge else None,
                **self.penalized.to_dict(),
                "fixed": {"statistic": self.fixed.statistic, "p_value": self.fixed.p_value},
                "gamma_max": self.gamma_max.to_dict() if self.gamma_max else None}

def ccc_tree_test(x: np.ndarray, y: np.ndarray, cond: np.ndarray, config: HierConfig,
                  fit: Optional[FittedTrees] = None, edge: Optional[Edge] = None,
                  level: Optional[float] = None) -> EdgeTest:
    """Fixed median partition, tree-grown alternative and their penalized combination"""
    cond = as_matrix(cond)
    n = len(x)
    sandwich = None
    if fit is not None and edge is not None and config.cov.kind in (COV_SANDWICH, COV_KNOWN_MARGINS):
        sandwich = EdgeSandwich(fit, edge)
    gamma0 = median_partition(cond)
    fixed = statistic_fixed(x, y, cond, gamma0, config.cov, fit, edge, sandwich)

    gamma_max = grow(x, y, cond, config.j_max, config.min_leaf)
    alternatives = []
    if gamma_max is not None:
        alternatives.append(statistic_fixed(x, y, cond, gamma_max, config.cov, fit, edge, sandwich))

    penalized = combine_with_penalty(fixed, alternatives, n, config.penalty(n),
                                     alpha=config.alpha if level is None else level)
    return EdgeTest(edge, penalized, fixed, gamma_max)

def test_edge(fit: FittedTrees, edge: Edge, config: HierConfig, level: Optional[float] = None) -> EdgeTest:
    """Decision-tree CCC test of ``edge`` on the PPITs of a stepwise fit"""
    x, y, cond = edge_data(fit, edge)
    with ErrorContext({"edge": edge}, NumericError):
        return ccc_tree_test(x, y, cond, config, fit, edge, level)

@dataclass(frozen=True)
class EdgeRecord:
    i: int
    j: int
    statistic: float
    p_value: float
    t_gamma0: float
    p_value_fixed: float
    rejected: bool
    gamma0: Partition
    gamma_max: Optional[Partition]

    def to_dict(self) -> Dict[str, Any]:
        return {"i": self.i, "j": self.j, "statistic": self.statistic, "p_value": self.p_value,
                "t_gamma0": self.t_gamma0, "p_value_fixed": self.p_value_fixed,
                "rejected": self.rejected,
                "gamma0": self.gamma0.to_dict(),
                "gamma_max": self.gamma_max.to_dict() if self.gamma_max else None}

@dataclass(frozen=True)
class HierOutcome:
    d: int
    alpha: float
    level: float
    tests: int
    rejected: bool
    stop_tree: Optional[int]
    records: List[EdgeRecord]

    @property
    def max_statistic(self) -> float:
        return max((r.statistic for r in self.records), default=0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {"d": self.d, "alpha": self.alpha, "level": self.level, "tests": self.tests,
                "rejected": self.rejected, "stop_tree": self.stop_tree,
                "records": [r.to_dict() for r in self.records]}

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def render_table(self) -> str:
        lines = [f"D-vine with d={self.d}: {self.tests} edge tests at level {self.level:.4g} "
                 f"(family-wise {self.alpha})"]
        for j in sorted({r.j for r in self.records}):
            lines.append(f"\nTree {j}")
            lines.append(f"  {'edge':<8}{'Theta_n':>11}{'p-value':>11}{'T(G0)':>10}  decision")
            for r in (r for r in self.records if r.j == j):
                decision = "reject" if r.rejected else "keep"
                lines.append(f"  {f'({r.i},{r.j})':<8}{r.statistic:>11.3f}"
                             f"{r.p_value:>11.4g}{r.t_gamma0:>10.3f}  {decision}")
        verdict = (f"simplifying assumption rejected in tree {self.stop_tree}" if self.rejected
                   else "simplifying assumption not rejected")
        lines.append(f"\nResult: {verdict}")
        return "\n".join(lines)

def hierarchical_test(sample: PseudoSample, config: HierConfig) -> HierOutcome:
    """Test the edges of trees 2..d-1 in order at level alpha / ((d-1)(d-2)/2),
    stopping after the first tree with a rejection.

    Raises:
        DomainError: If d < 3
        NumericError: If a fit or a test fails; details name the edge
    """
    d = sample.d
    if d < 3:
        raise DomainError("the hierarchical test needs at least three variables", parameter="d", value=d)
    tests = (d - 1) * (d - 2) // 2
    level = config.alpha / tests
    logger.debug(f"Hierarchical test of {tests} edges at level {level:.4g}")

    fit: Optional[FittedTrees] = None
    records: List[EdgeRecord] = []
    stop_tree = None
    for j in range(2, d):
        fit = stepwise_fit(sample, config.families, up_to_tree=j - 1, previous=fit)
        for i in range(1, d - j + 1):
            result = test_edge(fit, (i, j), config, level)
            outcome = result.penalized
            rejected = outcome.p_value < level
            records.append(EdgeRecord(
                i=i, j=j, statistic=outcome.statistic, p_value=outcome.p_value,
                t_gamma0=result.fixed.statistic, p_value_fixed=result.fixed.p_value, rejected=rejected,
                gamma0=result.fixed.partition, gamma_max=result.gamma_max))
            logger.debug(f"Edge ({i},{j}): Theta={outcome.statistic:.3f} p={outcome.p_value:.4g}")
        if any(r.rejected for r in records if r.j == j):
            stop_tree = j
            logger.debug(f"Rejection in tree {j}; stopping")
            break

    return HierOutcome(d, config.alpha, level, tests, stop_tree is not None, stop_tree, records)
