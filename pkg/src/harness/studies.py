"""
Monte Carlo studies: size and power of the CCC test on simulated D-vines,
and the probe of the penalty lower bound.

Replication ``r`` of every cell draws its sample from substream ``(seed, r)``,
so cells share random numbers and results do not depend on the number of
workers.
"""
import itertools
import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from ..cache import get_cache
from ..ccc.statistic import CovMode, chi2_quantile
from ..config import get_config
from ..constants import (
    COV_ORACLE, CSV_COLUMNS, DEFAULT_ALPHA, DEFAULT_J_MAX, DEFAULT_LAMBDA_GRID, DEFAULT_MIN_LEAF,
    DEFAULT_MISSPEC_FAMILIES, DEFAULT_MISSPEC_TAUS, DEFAULT_PENALTY_BETA, DEFAULT_PENALTY_C,
    DEFAULT_PENALTY_GRID, DEFAULT_RANDOM_SEED, DEFAULT_REPS, DEFAULT_FULL_SCALE_REPS, DEFAULT_TAU,
    EXAMPLE_DIMENSION, EXAMPLE_SMALL, FUNCTIONAL_SUM, VALID_FUNCTIONALS, STUDY_DIMENSION,
    STUDY_FUNCTIONAL, STUDY_MISSPEC, STUDY_PENALTY, STUDY_PSEUDO_OBS, STUDY_SIZE_POWER, VALID_STUDIES
)
from ..dvine.fit import propagate_pairs, stepwise_fit
from ..dvine.model import build_example_spec
from ..dvine.sample import rank_pseudo_obs
from ..dvine.simulate import simulate
from ..error_handler import safe_execute
from ..exceptions import StudyError, SVCTError, ValidationError, format_error_for_logging
from ..hier import EdgeTest, HierConfig, ccc_tree_test, hierarchical_test, test_edge

logger = logging.getLogger("SVCT.Harness")

VARIANT_THETA = "theta"
VARIANT_GAMMA0 = "gamma0"
VARIANT_ESTIMATED = "estimated"
VARIANT_ORACLE = "oracle"

EXTRA_COLUMNS = ["variant", "fit_family", "failures", "c", "beta", "lambda_n",
                 "max_b_n", "mean_b_n", "frac_above", "mismatches"]

@dataclass(frozen=True)
class StudyConfig:
    """One Monte Carlo study: a grid of cells and the test settings"""

    study: str = STUDY_SIZE_POWER
    ns: Tuple[int, ...] = (1000,)
    lambdas: Tuple[float, ...] = tuple(DEFAULT_LAMBDA_GRID)
    reps: int = DEFAULT_REPS
    seed: int = DEFAULT_RANDOM_SEED
    ds: Tuple[int, ...] = ()
    taus: Tuple[float, ...] = ()
    functionals: Tuple[str, ...] = ()
    fit_families: Tuple[str, ...] = ()
    hierarchical: bool = False
    full_scale: bool = False
    alpha: float = DEFAULT_ALPHA
    j_max: int = DEFAULT_J_MAX
    min_leaf: int = DEFAULT_MIN_LEAF
    penalty_c: float = DEFAULT_PENALTY_C
    penalty_beta: float = DEFAULT_PENALTY_BETA
    penalty_grid: Tuple[Tuple[float, float], ...] = tuple(DEFAULT_PENALTY_GRID)
    cov: CovMode = field(default_factory=CovMode.sandwich)
    workers: int = 0
    use_cache: bool = False

    def __post_init__(self):
        if self.study not in VALID_STUDIES:
            raise ValidationError(f"unknown study '{self.study}' (choose from {VALID_STUDIES})", field_name="study")
        if self.reps < 1 and not self.full_scale:
            raise ValidationError("reps must be at least 1", field_name="reps")
        if not self.ns or min(self.ns) < 2:
            raise ValidationError("sample sizes must be at least 2", field_name="n")
        if not self.lambdas or any(not 0.0 <= lam <= 1.0 for lam in self.lambdas):
            raise ValidationError("lambda values must lie in [0, 1]", field_name="lambdas")
        bad = [f for f in self.functionals if f not in VALID_FUNCTIONALS]
        if bad:
            raise ValidationError(f"unknown functionals {bad}", field_name="functionals")

    @property
    def replications(self) -> int:
        if self.full_scale:
            return int(get_config().get("study", "full_scale_reps", DEFAULT_FULL_SCALE_REPS))
        return self.reps

    @property
    def example(self) -> str:
        return EXAMPLE_DIMENSION if self.study == STUDY_DIMENSION else EXAMPLE_SMALL

    def grid_ds(self) -> Tuple[int, ...]:
        if self.study == STUDY_DIMENSION:
            return self.ds or (4, 8, 12)
        return (4,)

    def grid_taus(self) -> Tuple[float, ...]:
        if self.taus:
            return self.taus
        return tuple(DEFAULT_MISSPEC_TAUS) if self.study == STUDY_MISSPEC else (DEFAULT_TAU,)

    def grid_functionals(self) -> Tuple[str, ...]:
        if self.functionals:
            return self.functionals
        return tuple(VALID_FUNCTIONALS) if self.study == STUDY_FUNCTIONAL else (FUNCTIONAL_SUM,)

    def grid_fit_families(self) -> Tuple[str, ...]:
        if self.fit_families:
            return self.fit_families
        return tuple(DEFAULT_MISSPEC_FAMILIES) if self.study == STUDY_MISSPEC else ("clayton",)

    def cells(self) -> List[Dict[str, Any]]:
        """Every combination of the grid, in output order"""
        grid = itertools.product(self.grid_functionals(), self.grid_ds(), self.grid_fit_families(),
                                 self.grid_taus(), self.ns, self.lambdas)
        return [{"functional": functional, "d": d, "fit_family": family, "tau": tau, "n": n, "lambda": lam}
                for functional, d, family, tau, n, lam in grid]

    def hier_config(self, fit_family: str, cov: Optional[CovMode] = None) -> HierConfig:
        return HierConfig(alpha=self.alpha, families=fit_family, j_max=self.j_max, min_leaf=self.min_leaf,
                          penalty_c=self.penalty_c, penalty_beta=self.penalty_beta, cov=cov or self.cov)

    def settings(self) -> Dict[str, Any]:
        """Test settings that determine cell results (cache key material)"""
        return {"alpha": self.alpha, "j_max": self.j_max, "min_leaf": self.min_leaf,
                "penalty_c": self.penalty_c, "penalty_beta": self.penalty_beta,
                "cov": asdict(self.cov), "hierarchical": self.hierarchical,
                "penalty_grid": [list(p) for p in self.penalty_grid]}

@dataclass
class CellResult:
    """Tallies of one cell (and variant) over its replications"""

    study: str
    cell: Dict[str, Any]
    reps: int
    rejections: int
    failures: int
    mean_stat: float
    mean_ms: float
    variant: str = ""
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def power(self) -> float:
        return self.rejections / self.reps if self.reps else float("nan")

    @property
    def se(self) -> float:
        if not self.reps:
            return float("nan")
        p = self.power
        return math.sqrt(p * (1.0 - p) / self.reps)

    def to_row(self) -> Dict[str, Any]:
        row = {"study": self.study, "functional": self.cell["functional"], "d": self.cell["d"],
               "n": self.cell["n"], "lambda": self.cell["lambda"], "tau": self.cell["tau"],
               "reps": self.reps, "rejections": self.rejections, "power": self.power, "se": self.se,
               "mean_stat": self.mean_stat, "mean_ms": self.mean_ms,
               "variant": self.variant, "fit_family": self.cell["fit_family"], "failures": self.failures}
        row.update(self.extra)
        return row

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CellResult":
        return cls(**data)

@dataclass
class StudyResult:
    study: str
    cells: List[CellResult]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame([cell.to_row() for cell in self.cells])
        columns = CSV_COLUMNS + [c for c in EXTRA_COLUMNS if c in frame.columns]
        return frame.reindex(columns=columns)

    def to_dict(self) -> Dict[str, Any]:
        return {"study": self.study, "cells": [cell.to_row() for cell in self.cells]}

def _sample(cfg: StudyConfig, cell: Dict[str, Any], replication: int):
    spec = build_example_spec(cfg.example, cell["tau"], cell["lambda"], cell["functional"],
                              d=cell["d"] if cfg.example == EXAMPLE_DIMENSION else None)
    return spec, simulate(spec, cell["n"], cfg.seed, replication)

def _estimated_edge_test(cfg: StudyConfig, cell: Dict[str, Any], values: np.ndarray,
                         cov: Optional[CovMode] = None) -> EdgeTest:
    d = values.shape[1]
    sample = rank_pseudo_obs(values)
    fit = stepwise_fit(sample, cell["fit_family"], up_to_tree=d - 2)
    return test_edge(fit, (1, d - 1), cfg.hier_config(cell["fit_family"], cov))

def _oracle_edge_test(cfg: StudyConfig, cell: Dict[str, Any], spec, values: np.ndarray) -> EdgeTest:
    d = values.shape[1]
    pairs = propagate_pairs(values, spec.true_copulas(values, d - 2), d - 1)
    x, y = pairs[(1, d - 1)]
    config = cfg.hier_config(cell["fit_family"], CovMode.oracle())
    return ccc_tree_test(x, y, values[:, 1:d - 1], config, edge=(1, d - 1))

def run_replication(cfg: StudyConfig, cell: Dict[str, Any], replication: int) -> Dict[str, Tuple[bool, float]]:
    """One replication of one cell: variant -> (rejected, statistic)"""
    spec, sample = _sample(cfg, cell, replication)
    values = sample.values

    if cfg.hierarchical:
        config = cfg.hier_config(cell["fit_family"])
        outcome = hierarchical_test(rank_pseudo_obs(values), config)
        return {VARIANT_THETA: (outcome.rejected, outcome.max_statistic)}

    if cfg.study == STUDY_PSEUDO_OBS:
        estimated = _estimated_edge_test(cfg, cell, values)
        oracle = _oracle_edge_test(cfg, cell, spec, values)
        return {VARIANT_ESTIMATED: (estimated.penalized.rejects(cfg.alpha), estimated.penalized.statistic),
                VARIANT_ORACLE: (oracle.penalized.rejects(cfg.alpha), oracle.penalized.statistic)}

    result = (_oracle_edge_test(cfg, cell, spec, values) if cfg.cov.kind == COV_ORACLE
              else _estimated_edge_test(cfg, cell, values))
    tallies = {VARIANT_THETA: (result.penalized.rejects(cfg.alpha), result.penalized.statistic)}
    if cfg.study == STUDY_FUNCTIONAL:
        tallies[VARIANT_GAMMA0] = (result.fixed.rejects(cfg.alpha), result.fixed.statistic)
    return tallies

def _guarded(func: Callable[..., Dict], cfg: StudyConfig, cell: Dict[str, Any], replication: int) -> Dict[str, Any]:
    """Run one replication; failures come back as records instead of exceptions"""
    started = time.perf_counter()
    try:
        value = safe_execute(func, {"study": cfg.study, "replication": replication, **cell},
                             StudyError, "REPLICATION_FAILED", cfg, cell, replication)
    except SVCTError as e:
        return {"success": False, "replication": replication, "error": format_error_for_logging(e)}
    return {"success": True, "replication": replication, "value": value,
            "ms": 1000.0 * (time.perf_counter() - started)}

def _workers(cfg: StudyConfig) -> int:
    """Requested workers (config 'study.threads' when unset), capped by SVCT_THREADS"""
    study = get_config().get_study_config()
    workers = int(cfg.workers) if cfg.workers > 0 else int(study.get("threads", 1) or 1)
    cap = int(study.get("max_threads", 0) or 0)
    if cap > 0:
        workers = min(workers, cap)
    return max(1, workers)

def _run_cell(func: Callable[..., Dict], cfg: StudyConfig, cell: Dict[str, Any]) -> List[Dict[str, Any]]:
    reps = cfg.replications
    workers = _workers(cfg)
    if workers > 1:
        records = Parallel(n_jobs=workers)(delayed(_guarded)(func, cfg, cell, r) for r in range(reps))
    else:
        records = [_guarded(func, cfg, cell, r) for r in range(reps)]
    records = sorted(records, key=lambda rec: rec["replication"])

    failed = [rec for rec in records if not rec["success"]]
    if failed:
        logger.warning(f"{len(failed)} of {reps} replications failed in cell {cell} and were excluded; "
                       f"first failure: {failed[0]['error']}")
    return records

def _cached(cfg: StudyConfig, cell: Dict[str, Any], compute: Callable[[], List[CellResult]]) -> List[CellResult]:
    cache = get_cache(force=cfg.use_cache) if cfg.use_cache else None
    descriptor = {"study": cfg.study, "cell": cell, "seed": cfg.seed, "reps": cfg.replications,
                  "settings": cfg.settings()}
    if cache is not None:
        hit = cache.get(descriptor)
        if hit:
            logger.debug(f"Using cached result for cell {cell}")
            return [CellResult.from_dict(item) for item in hit["cells"]]
    results = compute()
    if cache is not None:
        cache.set(descriptor, {"cells": [r.to_dict() for r in results]})
    return results

def _tally(cfg: StudyConfig, cell: Dict[str, Any], records: List[Dict[str, Any]]) -> List[CellResult]:
    ok = [rec for rec in records if rec["success"]]
    failures = len(records) - len(ok)
    variants = list(ok[0]["value"]) if ok else [VARIANT_THETA]
    mean_ms = float(np.mean([rec["ms"] for rec in ok])) if ok else float("nan")
    results = []
    for variant in variants:
        draws = [rec["value"][variant] for rec in ok]
        results.append(CellResult(
            study=cfg.study, cell=dict(cell), reps=len(draws),
            rejections=int(sum(bool(rejected) for rejected, _ in draws)), failures=failures,
            mean_stat=float(np.mean([stat for _, stat in draws])) if draws else float("nan"),
            mean_ms=mean_ms, variant=variant if len(variants) > 1 or variant != VARIANT_THETA else ""))
    return results

def run_power_study(cfg: StudyConfig) -> StudyResult:
    """Empirical rejection rates of the CCC test over the study grid

    Raises:
        ValidationError: For the penalty probe, which has its own runner
    """
    if cfg.study == STUDY_PENALTY:
        raise ValidationError("use run_penalty_probe for the penalty probe", field_name="study")

    cells: List[CellResult] = []
    grid = cfg.cells()
    logger.info(f"Study {cfg.study}: {len(grid)} cells x {cfg.replications} replications")
    for index, cell in enumerate(grid, start=1):
        results = _cached(cfg, cell, lambda: _tally(cfg, cell, _run_cell(run_replication, cfg, cell)))
        for result in results:
            logger.info(f"[{index}/{len(grid)}] {cell} {result.variant or ''} "
                        f"power={result.power:.3f} (se {result.se:.3f})")
        cells.extend(results)
    return StudyResult(cfg.study, cells)

def probe_replication(cfg: StudyConfig, cell: Dict[str, Any], replication: int) -> Dict[str, float]:
    """Fixed-partition and maximal statistics of one sample"""
    spec, sample = _sample(cfg, cell, replication)
    result = (_oracle_edge_test(cfg, cell, spec, sample.values) if cfg.cov.kind == COV_ORACLE
              else _estimated_edge_test(cfg, cell, sample.values))
    record = result.penalized.penalty
    return {"t0": record.t_gamma0, "t_max": record.t_gamma_max, "b_n": record.b_n,
            "df": float(result.fixed.df)}

def _probe_rows(cfg: StudyConfig, cell: Dict[str, Any], records: List[Dict[str, Any]]) -> List[CellResult]:
    ok = [rec["value"] for rec in records if rec["success"]]
    failures = len(records) - len(ok)
    n = cell["n"]
    mean_ms = float(np.mean([rec["ms"] for rec in records if rec["success"]])) if ok else float("nan")
    b_n = np.array([v["b_n"] for v in ok])
    rows = []
    for c, beta in cfg.penalty_grid:
        lambda_n = c * n ** (-beta)
        rejections, mismatches, thetas = 0, 0, []
        for v in ok:
            crit = chi2_quantile(int(v["df"]), 1.0 - cfg.alpha)
            theta = max(v["t0"] + n * lambda_n, v["t_max"]) - n * lambda_n
            thetas.append(theta)
            rejects = theta > crit
            rejections += int(rejects)
            if lambda_n > v["b_n"] and rejects != (v["t0"] > crit):
                mismatches += 1
        rows.append(CellResult(
            study=cfg.study, cell=dict(cell), reps=len(ok), rejections=rejections, failures=failures,
            mean_stat=float(np.mean(thetas)) if thetas else float("nan"), mean_ms=mean_ms,
            extra={"c": c, "beta": beta, "lambda_n": lambda_n,
                   "max_b_n": float(b_n.max()) if len(b_n) else float("nan"),
                   "mean_b_n": float(b_n.mean()) if len(b_n) else float("nan"),
                   "frac_above": float(np.mean(b_n >= lambda_n)) if len(b_n) else float("nan"),
                   "mismatches": mismatches}))
    return rows

def run_penalty_probe(cfg: StudyConfig) -> StudyResult:
    """Per sample size: lower bounds b_n of the penalty against candidate penalties c n^(-beta)"""
    if cfg.study != STUDY_PENALTY:
        cfg = replace(cfg, study=STUDY_PENALTY)
    cells: List[CellResult] = []
    for cell in cfg.cells():
        rows = _cached(cfg, cell, lambda: _probe_rows(cfg, cell, _run_cell(probe_replication, cfg, cell)))
        for row in rows:
            flag = " above penalty" if row.extra["max_b_n"] >= row.extra["lambda_n"] else ""
            logger.info(f"n={cell['n']} c={row.extra['c']} beta={row.extra['beta']}: "
                        f"max b_n={row.extra['max_b_n']:.4f} vs lambda_n={row.extra['lambda_n']:.4f}{flag}")
        cells.extend(rows)
    return StudyResult(cfg.study, cells)
