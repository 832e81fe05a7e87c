"""
Stepwise maximum-likelihood fitting of a simplified D-vine and propagation
of the partial probability integral transforms (PPITs) between trees.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from ..bivcop import BivCopula, FamilyTag
from ..constants import FIT_XTOL, NEAR_INDEPENDENCE_GAIN, SCORE_TOL
from ..error_handler import ErrorContext
from ..exceptions import ConvergenceError, DomainError, NumericError, StateError
from .model import Edge, FamilySpec, family_grid
from .sample import PseudoSample

logger = logging.getLogger("SVCT.DVine")

Pair = Tuple[np.ndarray, np.ndarray]

NEWTON_STEPS = 20

@dataclass(frozen=True, eq=False)
class FittedTrees:
    """Result of a stepwise fit through tree ``J``.

    ``pairs`` holds the PPIT column pair of every edge in trees 1..J+1 (as far
    as the vine reaches); ``scores`` holds per-observation parameter scores
    for the edges that were actually estimated.
    """

    d: int
    n: int
    J: int
    values: np.ndarray
    families: Dict[Edge, FamilyTag]
    copulas: Dict[Edge, BivCopula]
    pairs: Dict[Edge, Pair]
    scores: Dict[Edge, np.ndarray]
    loglik: Dict[Edge, float]
    estimated: Dict[Edge, bool]

    def copula(self, i: int, j: int) -> BivCopula:
        return self.copulas[(i, j)]

    def tree(self, j: int) -> List[BivCopula]:
        if j > self.J:
            raise StateError(f"tree {j} has not been fitted (fitted through tree {self.J})")
        return [self.copulas[(i, j)] for i in range(1, self.d - j + 1)]

    def pair(self, i: int, j: int) -> Pair:
        if (i, j) not in self.pairs:
            raise StateError(f"PPITs of edge ({i},{j}) need trees 1..{j - 1} fitted "
                             f"(fitted through tree {self.J})", details={"edge": (i, j)})
        return self.pairs[(i, j)]

    def sub_edges(self, edge: Edge) -> List[Edge]:
        """Edges of trees 1..j-1 on the variables i..i+j, which determine the PPITs of ``edge``"""
        i, j = edge
        return [(a, b) for b in range(1, j) for a in range(i, i + j - b + 1)]

    def estimated_edges(self, edges: Optional[List[Edge]] = None) -> List[Edge]:
        edges = list(self.copulas) if edges is None else edges
        return [edge for edge in edges if self.estimated.get(edge, False)]

    def summary(self) -> List[Dict]:
        return [{"edge": list(edge), "family": self.families[edge].label,
                 "theta": float(np.asarray(cop.theta)), "tau": cop.tau,
                 "loglik": self.loglik[edge], "estimated": self.estimated[edge]}
                for edge, cop in sorted(self.copulas.items(), key=lambda kv: (kv[0][1], kv[0][0]))]

def advance_tree(pairs: Dict[Edge, Pair], copulas: Mapping[Edge, BivCopula], j: int,
                 first_var: int, last_var: int) -> None:
    """Add the pairs of tree j+1 on the variables first_var..last_var to ``pairs`` in place"""
    for i in range(first_var, last_var - j):
        x, y = pairs[(i, j)]
        x_next, y_next = pairs[(i + 1, j)]
        pairs[(i, j + 1)] = (
            np.asarray(copulas[(i, j)].hfunc(x, y, "second")),
            np.asarray(copulas[(i + 1, j)].hfunc(x_next, y_next, "first")),
        )

def propagate_pairs(values: np.ndarray, copulas: Mapping[Edge, BivCopula], max_tree: int,
                    first_var: int = 1) -> Dict[Edge, Pair]:
    """PPIT pairs of trees 1..max_tree from the copulas of trees 1..max_tree-1.

    ``values`` holds the columns of the variables ``first_var, first_var + 1, ...``;
    edges are keyed with the global variable indices.
    """
    m = values.shape[1]
    last = first_var + m - 1
    pairs: Dict[Edge, Pair] = {}
    for i in range(first_var, last):
        pairs[(i, 1)] = (values[:, i - first_var], values[:, i + 1 - first_var])

    for j in range(1, min(max_tree, m - 1)):
        advance_tree(pairs, copulas, j, first_var, last)
    return pairs

def pair_loglik(cop: BivCopula, x: np.ndarray, y: np.ndarray) -> float:
    return float(np.sum(cop.log_density(x, y)))

def _newton_polish(family: FamilyTag, theta: float, x: np.ndarray, y: np.ndarray) -> float:
    """Drive the mean score to zero from the optimizer's solution"""
    lo, hi = family.family.fit_bounds
    for _ in range(NEWTON_STEPS):
        cop = BivCopula(family, theta)
        mean_score = float(np.mean(cop.score(x, y)))
        if abs(mean_score) < SCORE_TOL:
            break
        step = 1e-6 * max(1.0, abs(theta))
        up = min(theta + step, hi)
        down = max(theta - step, lo)
        slope = (float(np.mean(BivCopula(family, up).score(x, y)))
                 - float(np.mean(BivCopula(family, down).score(x, y)))) / (up - down)
        if not np.isfinite(slope) or slope >= 0.0:
            break
        candidate = float(np.clip(theta - mean_score / slope, lo, hi))
        if candidate in (lo, hi):
            break
        theta = candidate
    return theta

def fit_pair(x: np.ndarray, y: np.ndarray, family: FamilyTag) -> Tuple[BivCopula, float, bool]:
    """Maximum-likelihood fit of one pair copula.

    Returns:
        Tuple[BivCopula, float, bool]: fitted copula, log-likelihood, and
        whether a parameter was estimated (False for the independence family
        and for fits that fall back to the independence limit)

    Raises:
        ConvergenceError: If the scalar optimizer fails
    """
    fam = family.family
    n = len(x)
    if not fam.has_parameter:
        return BivCopula(family, 0.0), 0.0, False

    def objective(theta: float) -> float:
        value = -pair_loglik(BivCopula(family, theta), x, y)
        return value if np.isfinite(value) else 1e300

    result = minimize_scalar(objective, bounds=fam.fit_bounds, method="bounded",
                             options={"xatol": FIT_XTOL})
    if not result.success:
        raise ConvergenceError(f"pair likelihood maximization failed: {result.message}",
                               operation="fit", diagnostics={"family": family.label, "theta": result.x})

    theta = _newton_polish(family, float(result.x), x, y)
    loglik = pair_loglik(BivCopula(family, theta), x, y)
    if loglik < -result.fun - 1e-9 * max(1.0, abs(result.fun)):
        theta, loglik = float(result.x), float(-result.fun)

    if loglik < NEAR_INDEPENDENCE_GAIN * n:
        logger.debug(f"{family.label} fit gains {loglik:.3g} over independence; "
                     f"recording the independence limit")
        return BivCopula(family, fam.independence_value), 0.0, False
    return BivCopula(family, theta), loglik, True

def stepwise_fit(sample: PseudoSample, families: FamilySpec, up_to_tree: Optional[int] = None,
                 previous: Optional[FittedTrees] = None) -> FittedTrees:
    """Fit trees 1..J edge by edge, then compute the PPIT pairs of tree J+1.

    Args:
        sample: Pseudo-observations
        families: One family, a per-tree list, or an edge -> family mapping
        up_to_tree: Last tree to fit (default d-1)
        previous: An earlier fit of the same sample to continue from

    Raises:
        DomainError: If ``up_to_tree`` is outside 1..d-1
        NumericError: If an edge fit fails; details name the edge
    """
    d, n = sample.d, sample.n
    J = d - 1 if up_to_tree is None else int(up_to_tree)
    if not 1 <= J <= d - 1:
        raise DomainError(f"up_to_tree must lie in 1..{d - 1}", parameter="up_to_tree", value=up_to_tree)
    grid = family_grid(d, families, J)
    values = sample.values

    if previous is not None:
        if previous.values is not values and not np.array_equal(previous.values, values):
            raise StateError("a fit can only be continued on the sample it was made from")
        if previous.J >= J:
            return previous
        start = previous.J + 1
        copulas, pairs = dict(previous.copulas), dict(previous.pairs)
        scores, loglik = dict(previous.scores), dict(previous.loglik)
        estimated, fitted_families = dict(previous.estimated), dict(previous.families)
    else:
        start = 1
        copulas, scores, loglik, estimated, fitted_families = {}, {}, {}, {}, {}
        pairs = propagate_pairs(values, {}, 1)

    for j in range(start, J + 1):
        for i in range(1, d - j + 1):
            edge = (i, j)
            x, y = pairs[edge]
            with ErrorContext({"edge": edge}, NumericError, "FIT_ERROR"):
                cop, ll, was_estimated = fit_pair(x, y, grid[edge])
                if was_estimated:
                    scores[edge] = np.asarray(cop.score(x, y), dtype=float)
            copulas[edge], loglik[edge], estimated[edge] = cop, ll, was_estimated
            fitted_families[edge] = grid[edge]
            logger.debug(f"Edge {edge}: {cop} loglik={ll:.3f}")

        if j + 1 <= d - 1:
            advance_tree(pairs, copulas, j, 1, d)

    logger.debug(f"Fitted trees {start}..{J} of a {d}-dimensional D-vine on {n} observations")
    return FittedTrees(d, n, J, values, fitted_families, copulas, pairs, scores, loglik, estimated)

def compute_ppits(fitted: FittedTrees, j: int, i: int) -> Pair:
    """PPIT pair of edge (i, j) under the fitted parameters of trees 1..j-1

    Raises:
        StateError: If trees 1..j-1 have not been fitted
    """
    if j - 1 > fitted.J:
        raise StateError(f"edge ({i},{j}) needs trees 1..{j - 1} fitted (fitted through tree {fitted.J})",
                         details={"edge": (i, j)})
    if not 1 <= i <= fitted.d - j:
        raise DomainError(f"tree {j} has edges 1..{fitted.d - j}", parameter="edge", value=(i, j))
    return fitted.pair(i, j)
