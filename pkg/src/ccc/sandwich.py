"""
Sandwich covariance of the leaf correlations of one D-vine edge.

The estimating equations stack the parameter scores of the estimated edges
the edge's PPITs depend on (trees 1..j-1 on the variables i..i+j) with the
leaf moment equations of the edge's PPIT pair. The Jacobian is block lower
triangular; the correlation rows of its inverse give

    psi = E (g_moments - M21 M11^{-1} g_scores)

where ``E`` extracts the correlations from the moment block. The rank term
adds the estimated effect of replacing the margins by rescaled ranks.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..bivcop import BivCopula
from ..constants import FD_COLUMN_STEP, FD_THETA_STEP, UNIT_CLAMP
from ..dvine.fit import FittedTrees, propagate_pairs
from ..dvine.model import Edge, conditioning_set
from ..error_handler import ErrorContext
from ..exceptions import NumericError, StateError
from .partition import Partition
from .stats import (
    GroupStats, checked_solve, correlation_extractor, estimating_values, group_stats, outer_mean
)

logger = logging.getLogger("SVCT.CCC")

@dataclass(frozen=True, eq=False)
class SandwichParts:
    """Oracle term, parameter-estimation term and rank term of the covariance"""

    star: np.ndarray
    pvc: np.ndarray
    rank: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.star + self.pvc + self.rank

    @property
    def known_margins(self) -> np.ndarray:
        return self.star + self.pvc

@dataclass(frozen=True, eq=False)
class _Evaluation:
    """Scores of the estimated sub-edges and the PPIT pair of the edge at one point"""

    scores: np.ndarray
    x: np.ndarray
    y: np.ndarray

def edge_data(fit: FittedTrees, edge: Edge) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """PPIT pair and conditioning columns of ``edge`` under the fitted parameters"""
    i, j = edge
    x, y = fit.pair(i, j)
    cond = fit.values[:, [k - 1 for k in conditioning_set(edge)]]
    return x, y, cond

def _theta_step(fit: FittedTrees, edge: Edge, theta: float) -> Tuple[float, float]:
    """Lower and upper evaluation points of a finite difference inside the fit bounds"""
    lo, hi = fit.families[edge].family.fit_bounds
    step = FD_THETA_STEP * max(1.0, abs(theta))
    down, up = theta - step, theta + step
    if down < lo:
        down = theta
    if up > hi:
        up = theta
    return down, up

def _upper_tail_sums(v: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """For each k, the sum of weights[m] over m with v[m] >= v[k]"""
    order = np.argsort(v, kind="mergesort")
    sorted_v = v[order]
    tail = np.vstack([np.cumsum(weights[order][::-1], axis=0)[::-1], np.zeros((1, weights.shape[1]))])
    position = np.searchsorted(sorted_v, v, side="left")
    return tail[position]

class EdgeSandwich:
    """Partition-independent pieces of the sandwich covariance of one edge.

    The scores and the PPIT pair are propagated once at the fitted parameters,
    at the finite-difference points of every estimated parameter, and (on
    first use of the rank term) at the perturbed data columns. Every
    partition tested on the edge reuses these evaluations; only the leaf
    moments are recomputed.

    Raises:
        StateError: If the edge is in the first tree or its lower trees are not fitted
        NumericError: If a parameter sits at its bound with no room for a finite difference
    """

    def __init__(self, fit: FittedTrees, edge: Edge):
        i, j = edge
        if j < 2:
            raise StateError("edges of the first tree have no conditioning set", details={"edge": edge})
        if j - 1 > fit.J:
            raise StateError(f"edge {edge} needs trees 1..{j - 1} fitted", details={"edge": edge})

        self.fit = fit
        self.edge = edge
        self.columns = list(range(i - 1, i + j))
        self.data = fit.values[:, self.columns]
        self.theta_edges: List[Edge] = fit.estimated_edges(fit.sub_edges(edge))
        self.theta_hat = np.array([float(np.asarray(fit.copulas[e].theta)) for e in self.theta_edges])
        self._column_points: Optional[List[Tuple[np.ndarray, _Evaluation, _Evaluation]]] = None

        with ErrorContext({"edge": edge, "operation": "sandwich"}, NumericError):
            self.base = self._evaluate(self.theta_hat, self.data)
            self.theta_points = [self._theta_point(col) for col in range(self.p)]

    @property
    def p(self) -> int:
        return len(self.theta_edges)

    def _copulas(self, theta: np.ndarray) -> Dict[Edge, BivCopula]:
        copulas = dict(self.fit.copulas)
        for e, value in zip(self.theta_edges, theta):
            copulas[e] = copulas[e].with_theta(value)
        return copulas

    def _evaluate(self, theta: np.ndarray, data: np.ndarray) -> _Evaluation:
        i, j = self.edge
        copulas = self._copulas(theta)
        pairs = propagate_pairs(data, copulas, j, first_var=i)
        scores = np.empty((data.shape[0], self.p))
        for col, e in enumerate(self.theta_edges):
            a, b = pairs[e]
            scores[:, col] = copulas[e].score(a, b)
        x, y = pairs[self.edge]
        return _Evaluation(scores, x, y)

    def _theta_point(self, col: int) -> Tuple[float, _Evaluation, _Evaluation]:
        e = self.theta_edges[col]
        down, up = _theta_step(self.fit, e, self.theta_hat[col])
        if up == down:
            raise NumericError(f"no room for a finite difference at theta={self.theta_hat[col]}",
                               operation="sandwich", diagnostics={"edge": e})
        theta_up, theta_down = self.theta_hat.copy(), self.theta_hat.copy()
        theta_up[col], theta_down[col] = up, down
        return up - down, self._evaluate(theta_up, self.data), self._evaluate(theta_down, self.data)

    @property
    def column_points(self) -> List[Tuple[np.ndarray, _Evaluation, _Evaluation]]:
        """Evaluations with each data column shifted down and up by the column step"""
        if self._column_points is None:
            points = []
            with ErrorContext({"edge": self.edge, "operation": "rank term"}, NumericError):
                for c in range(self.data.shape[1]):
                    up, down = self.data.copy(), self.data.copy()
                    up[:, c] = np.clip(self.data[:, c] + FD_COLUMN_STEP, UNIT_CLAMP, 1.0 - UNIT_CLAMP)
                    down[:, c] = np.clip(self.data[:, c] - FD_COLUMN_STEP, UNIT_CLAMP, 1.0 - UNIT_CLAMP)
                    points.append((up[:, c] - down[:, c], self._evaluate(self.theta_hat, up),
                                   self._evaluate(self.theta_hat, down)))
            self._column_points = points
        return self._column_points

    def rank_correction(self, stacked: Callable[[_Evaluation], np.ndarray]) -> np.ndarray:
        """Estimated effect of rank pseudo-observations on the stacked estimating values.

        For column c, W_c(k) = (1/n) sum_m D_c[m] (1{V_c^k <= V_c^m} - V_c^m), where
        D_c is the derivative of the estimating values in the c-th data column.
        The sum over columns is returned centered.
        """
        n = self.data.shape[0]
        total = None
        for c, (width, up, down) in enumerate(self.column_points):
            derivative = (stacked(up) - stacked(down)) / width[:, None]
            v = self.data[:, c]
            w = (_upper_tail_sums(v, derivative) - (derivative * v[:, None]).sum(axis=0)) / n
            total = w if total is None else total + w
        return total - total.mean(axis=0)

    def covariance(self, part: Partition, include_rank_term: bool = True) -> SandwichParts:
        """Covariance of sqrt(n) times the leaf correlations of the edge on ``part``

        Raises:
            SingularMatrixError: If a Jacobian block cannot be inverted
        """
        p = self.p
        with ErrorContext({"edge": self.edge, "operation": "sandwich"}, NumericError):
            x, y, cond = edge_data(self.fit, self.edge)
            stats: GroupStats = group_stats(x, y, cond, part)
            extractor = correlation_extractor(stats)
            n = len(x)

            def stacked(ev: _Evaluation) -> np.ndarray:
                moments = estimating_values(ev.x, ev.y, stats.masks, stats).reshape(n, -1)
                return np.hstack([ev.scores, moments])

            base = stacked(self.base)
            g_scores, g_moments = base[:, :p], base[:, p:]

            star = outer_mean(g_moments @ extractor.T)
            corrected = g_moments
            if p:
                jac = np.column_stack([(stacked(up).mean(axis=0) - stacked(down).mean(axis=0)) / width
                                       for width, up, down in self.theta_points])
                m11, m21 = jac[:p], jac[p:]
                gain = checked_solve(m11.T, m21.T, "score Jacobian").T
                corrected = g_moments - g_scores @ gain.T
                known = outer_mean(corrected @ extractor.T)
            else:
                gain = np.zeros((g_moments.shape[1], 0))
                known = star

            rank = np.zeros_like(star)
            if include_rank_term:
                w = self.rank_correction(stacked)
                w_corrected = (w[:, p:] - w[:, :p] @ gain.T) if p else w[:, p:]
                rank = outer_mean((corrected + w_corrected) @ extractor.T) - known

        logger.debug(f"Sandwich for edge {self.edge}: {p} parameters, diagonal {np.diag(known + rank)}")
        return SandwichParts(star=star, pvc=known - star, rank=rank)

def sandwich_covariance(fit: FittedTrees, edge: Edge, part: Partition,
                        include_rank_term: bool = True) -> SandwichParts:
    """Covariance of sqrt(n) times the leaf correlations of ``edge``

    Build an :class:`EdgeSandwich` directly to test several partitions on one edge.

    Raises:
        StateError: If the trees below ``edge`` have not been fitted
        SingularMatrixError: If a Jacobian block cannot be inverted
    """
    return EdgeSandwich(fit, edge).covariance(part, include_rank_term)
