"""
Per-leaf moments and correlations, their estimating functions, and the
oracle covariance of the correlation vector.

For leaf ``l`` the parameter ``phi_l = (mu_x, mu_y, s_xx, s_yy, r)`` solves
the mean of the estimating function

    1_l * (x - mu_x, y - mu_y, (x - mu_x)^2 - s_xx, (y - mu_y)^2 - s_yy,
           (x - mu_x)(y - mu_y) / sqrt(s_xx s_yy) - r)

with moments taken over the leaf (divisor n * pi_l).
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from ..constants import CONDITION_LIMIT
from ..exceptions import DegenerateDataError, PartitionError, SingularMatrixError, SizeError
from .partition import Partition, as_matrix

logger = logging.getLogger("SVCT.CCC")

PHI_SIZE = 5

def checked_solve(matrix: np.ndarray, rhs: np.ndarray, operation: str) -> np.ndarray:
    """Solve ``matrix @ out = rhs`` with a pivoted LU factorization

    Raises:
        SingularMatrixError: If the condition number exceeds 1e12
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    condition = np.linalg.cond(matrix)
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise SingularMatrixError(f"matrix is numerically singular (condition {condition:.3g})",
                                  operation=operation, diagnostics={"condition": float(condition)})
    return scipy.linalg.lu_solve(scipy.linalg.lu_factor(matrix), rhs)

@dataclass(frozen=True, eq=False)
class GroupStats:
    """Leaf moments of one PPIT pair; arrays have one entry per leaf"""

    n: int
    counts: np.ndarray
    mass: np.ndarray
    mu_x: np.ndarray
    mu_y: np.ndarray
    var_x: np.ndarray
    var_y: np.ndarray
    cov: np.ndarray
    corr: np.ndarray
    masks: np.ndarray
    x: np.ndarray
    y: np.ndarray

    @property
    def L(self) -> int:
        return len(self.counts)

    def phi(self, leaf: int) -> np.ndarray:
        return np.array([self.mu_x[leaf], self.mu_y[leaf], self.var_x[leaf], self.var_y[leaf],
                         self.corr[leaf]])

def group_stats(x: np.ndarray, y: np.ndarray, cond: np.ndarray, part: Partition) -> GroupStats:
    """Leaf masses, means, variances, covariance and correlation

    Raises:
        PartitionError: If a leaf holds fewer than two observations
        DegenerateDataError: If x or y is constant inside a leaf
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    cond = as_matrix(cond)
    n = len(x)
    if len(y) != n or cond.shape[0] != n:
        raise SizeError(f"x, y and cond disagree in length ({n}, {len(y)}, {cond.shape[0]})")
    masks = part.masks(cond)
    counts = masks.sum(axis=0)
    for leaf, count in enumerate(counts):
        if count < 2:
            raise PartitionError(f"leaf {leaf} holds {count} observations", leaf=leaf)

    mass = counts / n
    mu_x = (masks * x[:, None]).sum(axis=0) / counts
    mu_y = (masks * y[:, None]).sum(axis=0) / counts
    dx = (x[:, None] - mu_x) * masks
    dy = (y[:, None] - mu_y) * masks
    var_x = (dx ** 2).sum(axis=0) / counts
    var_y = (dy ** 2).sum(axis=0) / counts
    cov = (dx * dy).sum(axis=0) / counts
    for leaf in range(part.L):
        if var_x[leaf] <= 0.0 or var_y[leaf] <= 0.0:
            raise DegenerateDataError(f"zero variance inside leaf {leaf}", leaf=leaf)
    corr = np.clip(cov / np.sqrt(var_x * var_y), -1.0, 1.0)
    return GroupStats(n, counts, mass, mu_x, mu_y, var_x, var_y, cov, corr, masks, x, y)

def estimating_values(x: np.ndarray, y: np.ndarray, masks: np.ndarray, stats: GroupStats) -> np.ndarray:
    """n x L x 5 values of the leaf estimating functions at the fitted ``phi``"""
    dx = x[:, None] - stats.mu_x
    dy = y[:, None] - stats.mu_y
    scale = 1.0 / np.sqrt(stats.var_x * stats.var_y)
    values = np.stack([dx, dy, dx ** 2 - stats.var_x, dy ** 2 - stats.var_y,
                       dx * dy * scale - stats.corr], axis=2)
    return values * masks[:, :, None]

def mean_jacobian(stats: GroupStats, leaf: int) -> np.ndarray:
    """Sample mean of d(estimating function)/d(phi) for one leaf"""
    mask = stats.masks[:, leaf].astype(float)
    dx = (stats.x - stats.mu_x[leaf]) * mask
    dy = (stats.y - stats.mu_y[leaf]) * mask
    s_xx, s_yy = stats.var_x[leaf], stats.var_y[leaf]
    scale = 1.0 / np.sqrt(s_xx * s_yy)
    pi = mask.mean()
    cross = np.mean(dx * dy) * scale

    jac = np.zeros((PHI_SIZE, PHI_SIZE))
    jac[0, 0] = jac[1, 1] = jac[2, 2] = jac[3, 3] = jac[4, 4] = -pi
    jac[2, 0] = -2.0 * np.mean(dx)
    jac[3, 1] = -2.0 * np.mean(dy)
    jac[4, 0] = -np.mean(dy) * scale
    jac[4, 1] = -np.mean(dx) * scale
    jac[4, 2] = -0.5 * cross / s_xx
    jac[4, 3] = -0.5 * cross / s_yy
    return jac

def correlation_extractor(stats: GroupStats) -> np.ndarray:
    """L x 5L matrix mapping stacked estimating values to correlation influence values.

    Row ``l`` holds ``-e_5' G_l^{-1}`` in the block of leaf ``l``.

    Raises:
        SingularMatrixError: If a leaf Jacobian is singular
    """
    L = stats.L
    extractor = np.zeros((L, PHI_SIZE * L))
    e5 = np.zeros(PHI_SIZE)
    e5[-1] = 1.0
    for leaf in range(L):
        jac = mean_jacobian(stats, leaf)
        row = checked_solve(jac.T, e5, "correlation extractor")
        extractor[leaf, PHI_SIZE * leaf:PHI_SIZE * (leaf + 1)] = -row
    return extractor

def influence_star(stats: GroupStats) -> np.ndarray:
    """n x L correlation influence values with the PPITs treated as observed"""
    values = estimating_values(stats.x, stats.y, stats.masks, stats).reshape(stats.n, -1)
    return values @ correlation_extractor(stats).T

def outer_mean(psi: np.ndarray) -> np.ndarray:
    centered = psi - psi.mean(axis=0)
    return centered.T @ centered / psi.shape[0]

def star_covariance(stats: GroupStats) -> np.ndarray:
    """Oracle covariance of sqrt(n) * correlations; diagonal since leaves are disjoint"""
    return outer_mean(influence_star(stats))

def corr_variance_star(stats: GroupStats, leaf: int) -> float:
    """Oracle asymptotic variance of the correlation estimate of ``leaf``"""
    if not 0 <= leaf < stats.L:
        raise PartitionError(f"no leaf {leaf} among {stats.L}", leaf=leaf)
    psi = influence_star(stats)[:, leaf]
    return float(np.mean((psi - psi.mean()) ** 2))

def closed_form_influence(stats: GroupStats, leaf: Optional[int] = None) -> np.ndarray:
    """(1/pi_l) 1_l (z_x z_y - r_l (z_x^2 + z_y^2) / 2) with z the leaf-standardized values"""
    zx = (stats.x[:, None] - stats.mu_x) / np.sqrt(stats.var_x)
    zy = (stats.y[:, None] - stats.mu_y) / np.sqrt(stats.var_y)
    psi = stats.masks / stats.mass * (zx * zy - 0.5 * stats.corr * (zx ** 2 + zy ** 2))
    return psi if leaf is None else psi[:, leaf]
