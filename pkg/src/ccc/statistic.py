"""
The constant-conditional-correlation (CCC) statistic, its covariance modes,
the penalized combination over partitions and the chi-square reference.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.stats import chi2

from ..constants import (
    COV_BOOTSTRAP, COV_KNOWN_MARGINS, COV_ORACLE, COV_SANDWICH, VALID_COV_MODES,
    DEFAULT_ALPHA, DEFAULT_BOOTSTRAP_REPS, DEFAULT_PENALTY_BETA, DEFAULT_PENALTY_C, DEFAULT_RANDOM_SEED
)
from ..dvine.fit import FittedTrees, stepwise_fit
from ..dvine.model import Edge
from ..dvine.sample import rank_pseudo_obs
from ..dvine.simulate import substream
from ..exceptions import (
    DegenerateDataError, DomainError, NumericError, PartitionError, SizeError, StateError
)
from .partition import Partition, as_matrix
from .sandwich import EdgeSandwich, edge_data
from .stats import GroupStats, checked_solve, group_stats, star_covariance

logger = logging.getLogger("SVCT.CCC")

@dataclass(frozen=True)
class CovMode:
    """How the covariance of the correlation vector is estimated"""

    kind: str = COV_SANDWICH
    reps: int = DEFAULT_BOOTSTRAP_REPS
    seed: int = DEFAULT_RANDOM_SEED

    def __post_init__(self):
        object.__setattr__(self, "kind", str(self.kind).lower())
        if self.kind not in VALID_COV_MODES:
            raise DomainError(f"covariance mode must be one of {VALID_COV_MODES}",
                              parameter="cov_mode", value=self.kind)
        if self.kind == COV_BOOTSTRAP and self.reps < 2:
            raise DomainError("the bootstrap needs at least two replicates", parameter="reps", value=self.reps)

    @classmethod
    def oracle(cls) -> "CovMode":
        return cls(COV_ORACLE)

    @classmethod
    def sandwich(cls) -> "CovMode":
        return cls(COV_SANDWICH)

    @classmethod
    def known_margins(cls) -> "CovMode":
        return cls(COV_KNOWN_MARGINS)

    @classmethod
    def bootstrap(cls, reps: int = DEFAULT_BOOTSTRAP_REPS, seed: int = DEFAULT_RANDOM_SEED) -> "CovMode":
        return cls(COV_BOOTSTRAP, reps, seed)

    @property
    def needs_fit(self) -> bool:
        return self.kind in (COV_SANDWICH, COV_KNOWN_MARGINS)

    def __str__(self) -> str:
        return f"bootstrap({self.reps})" if self.kind == COV_BOOTSTRAP else self.kind

@dataclass(frozen=True)
class PenaltyRecord:
    n_lambda: float
    t_gamma0: float
    t_gamma_max: float
    b_n: float

    def to_dict(self) -> Dict[str, float]:
        return {"n_lambda": self.n_lambda, "t_gamma0": self.t_gamma0,
                "t_gamma_max": self.t_gamma_max, "b_n": self.b_n}

@dataclass(frozen=True, eq=False)
class TestOutcome:
    """One CCC statistic with its chi-square reference"""

    statistic: float
    df: int
    p_value: float
    mode: CovMode
    partition: Partition
    penalty: Optional[PenaltyRecord] = None
    correlations: Tuple[float, ...] = ()
    masses: Tuple[float, ...] = ()
    edge: Optional[Edge] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    def rejects(self, alpha: float) -> bool:
        return self.p_value < alpha

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
            "mode": str(self.mode),
            "penalty": self.penalty.to_dict() if self.penalty else None,
            "partition": self.partition.to_dict(),
            "correlations": list(self.correlations),
            "masses": list(self.masses),
        }
        if self.edge is not None:
            data["edge"] = list(self.edge)
        data.update(self.extra)
        return data

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

def chi2_quantile(df: int, p: float) -> float:
    """Quantile of the chi-square distribution with ``df`` degrees of freedom"""
    if df < 1:
        raise DomainError("degrees of freedom must be at least 1", parameter="df", value=df)
    if not 0.0 <= p <= 1.0:
        raise DomainError("probability must lie in [0, 1]", parameter="p", value=p)
    return float(chi2.ppf(p, df))

def chi2_sf(df: int, x: float) -> float:
    """Upper tail probability of the chi-square distribution"""
    if df < 1:
        raise DomainError("degrees of freedom must be at least 1", parameter="df", value=df)
    return float(chi2.sf(x, df))

def default_penalty(n: int, c: float = DEFAULT_PENALTY_C, beta: float = DEFAULT_PENALTY_BETA) -> float:
    """lambda_n = c * n^(-beta)"""
    if n < 1:
        raise SizeError("penalty needs n >= 1", n=n, minimum=1)
    return float(c) * float(n) ** (-float(beta))

def penalty_bound(t_gamma_max: float, tau_crit: float, n: int) -> float:
    """Smallest penalty above which the penalized and fixed-partition decisions agree"""
    if n < 1:
        raise SizeError("penalty bound needs n >= 1", n=n, minimum=1)
    return (float(t_gamma_max) - float(tau_crit)) / n

def difference_matrix(L: int) -> np.ndarray:
    """(L-1) x L matrix with rows e_l - e_{l+1}"""
    return np.eye(L - 1, L) - np.eye(L - 1, L, k=1)

def average_matrix(mass: np.ndarray) -> np.ndarray:
    """L x L matrix B with (B r)'(B r) = sum_l pi_l (r_l - r_bar)^2, pi normalized to sum one"""
    weights = np.asarray(mass, dtype=float) / np.sum(mass)
    return np.sqrt(weights)[:, None] * (np.eye(len(weights)) - weights[None, :])

def quadratic_form(r: np.ndarray, sigma: np.ndarray, n: int) -> float:
    """n (A r)' (A sigma A')^{-1} (A r) with A the first-difference matrix"""
    r = np.asarray(r, dtype=float)
    A = difference_matrix(len(r))
    contrast = A @ r
    solved = checked_solve(A @ sigma @ A.T, contrast, "contrast covariance")
    return float(max(n * contrast @ solved, 0.0))

def quadratic_form_avg(r: np.ndarray, sigma: np.ndarray, n: int, mass: np.ndarray) -> float:
    """The same statistic written with deviations from the mass-weighted average correlation"""
    r = np.asarray(r, dtype=float)
    B = average_matrix(mass)
    deviation = B @ r
    middle = B @ sigma @ B.T
    rank = np.linalg.matrix_rank(middle, tol=1e-12 * max(np.trace(middle), 1e-300))
    if rank < len(r) - 1:
        raise NumericError("deviation covariance has deficient rank", operation="average form",
                           diagnostics={"rank": int(rank), "expected": len(r) - 1})
    return float(max(n * deviation @ scipy.linalg.pinvh(middle) @ deviation, 0.0))

def bootstrap_covariance(x: np.ndarray, y: np.ndarray, cond: np.ndarray, part: Partition,
                         reps: int = DEFAULT_BOOTSTRAP_REPS, seed: int = DEFAULT_RANDOM_SEED,
                         fit: Optional[FittedTrees] = None, edge: Optional[Edge] = None) -> np.ndarray:
    """n times the bootstrap covariance of the leaf correlations.

    With a fit and an edge, each replicate resamples rows of the sub-vine
    variables, recomputes rank pseudo-observations, refits the lower trees
    and recomputes the PPITs; otherwise rows of (x, y, cond) are resampled.

    Raises:
        NumericError: If fewer than two replicates succeed
    """
    cond = as_matrix(cond)
    n = len(x)
    draws: List[np.ndarray] = []
    failed = 0
    if fit is not None and edge is not None:
        i, j = edge
        columns = list(range(i - 1, i + j))
        local_families = {(a - i + 1, b): fit.families[(a, b)] for (a, b) in fit.sub_edges(edge)}

    for b in range(reps):
        rows = substream(seed, b, 0).integers(0, n, n)
        try:
            if fit is not None and edge is not None:
                sample = rank_pseudo_obs(fit.values[rows][:, columns])
                refit = stepwise_fit(sample, local_families, up_to_tree=j - 1)
                xb, yb = refit.pair(1, j)
                cond_b = sample.values[:, 1:j]
            else:
                xb, yb, cond_b = x[rows], y[rows], cond[rows]
            draws.append(group_stats(xb, yb, cond_b, part).corr)
        except (PartitionError, DegenerateDataError, NumericError) as e:
            failed += 1
            logger.debug(f"Bootstrap replicate {b} skipped: {e}")

    if len(draws) < 2:
        raise NumericError(f"only {len(draws)} of {reps} bootstrap replicates succeeded",
                           operation="bootstrap", diagnostics={"failed": failed})
    if failed:
        logger.warning(f"{failed} of {reps} bootstrap replicates failed and were skipped")
    return n * np.atleast_2d(np.cov(np.vstack(draws), rowvar=False, ddof=1))

def resolve_edge_data(x, y, cond, fit: Optional[FittedTrees], edge: Optional[Edge]):
    """Fill x, y and cond from the fit when they are not given"""
    if x is None or y is None or cond is None:
        if fit is None or edge is None:
            raise StateError("either data columns or a fit and an edge are required")
        return edge_data(fit, edge)
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float), as_matrix(cond)

def correlation_covariance(stats: GroupStats, x, y, cond, part: Partition, cov: CovMode,
                           fit: Optional[FittedTrees], edge: Optional[Edge],
                           sandwich: Optional[EdgeSandwich] = None) -> np.ndarray:
    """Covariance of sqrt(n) times the leaf correlations under ``cov``

    ``sandwich`` reuses the evaluations of an edge across partitions.
    """
    if cov.kind == COV_ORACLE:
        return star_covariance(stats)
    if cov.kind == COV_BOOTSTRAP:
        return bootstrap_covariance(x, y, cond, part, cov.reps, cov.seed, fit, edge)
    if fit is None or edge is None:
        raise StateError(f"the {cov.kind} covariance needs a fitted vine and an edge")
    if sandwich is None:
        sandwich = EdgeSandwich(fit, edge)
    return sandwich.covariance(part, include_rank_term=cov.kind == COV_SANDWICH).total

def _outcome(statistic: float, stats: GroupStats, part: Partition, cov: CovMode,
             edge: Optional[Edge]) -> TestOutcome:
    df = stats.L - 1
    return TestOutcome(statistic=statistic, df=df, p_value=chi2_sf(df, statistic), mode=cov,
                       partition=part, correlations=tuple(float(r) for r in stats.corr),
                       masses=tuple(float(m) for m in stats.mass), edge=edge)

def _prepare(x, y, cond, part: Partition, fit, edge):
    if part.L < 2:
        raise PartitionError("a CCC statistic needs at least two leaves")
    x, y, cond = resolve_edge_data(x, y, cond, fit, edge)
    return x, y, cond, group_stats(x, y, cond, part)

def statistic_fixed(x: Optional[np.ndarray], y: Optional[np.ndarray], cond: Optional[np.ndarray],
                    part: Partition, cov: CovMode, fit: Optional[FittedTrees] = None,
                    edge: Optional[Edge] = None, sandwich: Optional[EdgeSandwich] = None) -> TestOutcome:
    """CCC statistic on a fixed partition using first differences of the leaf correlations

    Raises:
        PartitionError: If the partition has fewer than two leaves or an empty leaf
        StateError: If a sandwich mode is requested without a fit
        SingularMatrixError: If the contrast covariance is singular
    """
    x, y, cond, stats = _prepare(x, y, cond, part, fit, edge)
    sigma = correlation_covariance(stats, x, y, cond, part, cov, fit, edge, sandwich)
    return _outcome(quadratic_form(stats.corr, sigma, stats.n), stats, part, cov, edge)

def statistic_avg_form(x: Optional[np.ndarray], y: Optional[np.ndarray], cond: Optional[np.ndarray],
                       part: Partition, cov: CovMode, fit: Optional[FittedTrees] = None,
                       edge: Optional[Edge] = None, sandwich: Optional[EdgeSandwich] = None) -> TestOutcome:
    """CCC statistic written with deviations from the average correlation; equals :func:`statistic_fixed`"""
    x, y, cond, stats = _prepare(x, y, cond, part, fit, edge)
    sigma = correlation_covariance(stats, x, y, cond, part, cov, fit, edge, sandwich)
    return _outcome(quadratic_form_avg(stats.corr, sigma, stats.n, stats.mass), stats, part, cov, edge)

def combine_with_penalty(t0: TestOutcome, alternatives: Sequence[TestOutcome], n: int,
                         lambda_n: float, alpha: float = DEFAULT_ALPHA) -> TestOutcome:
    """Penalized maximum over the fixed partition and the alternatives.

    Theta = max(T0 + n lambda, T_1, ..., T_M) - n lambda, referred to the
    chi-square distribution of the fixed partition.

    Raises:
        DomainError: If lambda_n is not positive
        NumericError: If Theta falls below T0
    """
    if lambda_n <= 0.0:
        raise DomainError("the penalty must be positive", parameter="lambda_n", value=lambda_n)
    n_lambda = n * lambda_n
    candidates = [t0.statistic + n_lambda] + [alt.statistic for alt in alternatives]
    best = int(np.argmax(candidates))
    theta = candidates[best] - n_lambda
    if theta < t0.statistic - 1e-12 * max(1.0, abs(t0.statistic)):
        raise NumericError("penalized statistic fell below the fixed-partition statistic",
                           operation="penalty", diagnostics={"theta": theta, "t0": t0.statistic})
    theta = max(theta, t0.statistic)

    t_max = max([alt.statistic for alt in alternatives], default=t0.statistic)
    record = PenaltyRecord(n_lambda=n_lambda, t_gamma0=t0.statistic, t_gamma_max=t_max,
                           b_n=penalty_bound(t_max, chi2_quantile(t0.df, 1.0 - alpha), n))
    chosen = t0 if best == 0 else alternatives[best - 1]
    return TestOutcome(statistic=theta, df=t0.df, p_value=chi2_sf(t0.df, theta), mode=t0.mode,
                       partition=chosen.partition, penalty=record, correlations=chosen.correlations,
                       masses=chosen.masses, edge=t0.edge,
                       extra={"null_partition": t0.partition.to_dict(),
                              "selected": "null" if best == 0 else "alternative"})
