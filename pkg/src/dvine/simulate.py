"""
Sampling from a D-vine by inverting the Rosenblatt transform.

Coordinates are drawn left to right. For coordinate ``k`` the uniform draw
``w_k`` is pushed back through the edges ``(k - j, j)``, ``j = k-1, ..., 1``,
with inverse h-functions; the forward conditional distributions
``B(m, k) = F(u_m | u_{m+1}, ..., u_{k-1})`` needed as the given arguments
are updated after each coordinate. A conditional edge is evaluated per row
once its conditioning coordinates have been drawn.
"""
import logging
from typing import Dict

import numpy as np

from ..bivcop import BivCopula
from ..constants import UNIT_CLAMP
from ..error_handler import ErrorContext
from ..exceptions import NumericError, SizeError
from .model import DVineSpec, Edge
from .sample import PseudoSample

logger = logging.getLogger("SVCT.DVine")

def substream(seed: int, replication: int, coordinate: int) -> np.random.Generator:
    """Independent counter-based generator for one (replication, coordinate)"""
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(replication), int(coordinate)))
    return np.random.Generator(np.random.Philox(sequence))

def uniform_draws(seed: int, n: int, d: int, replication: int = 0) -> np.ndarray:
    """n x d matrix of independent uniforms, one substream per column"""
    columns = [substream(seed, replication, k).random(n) for k in range(1, d + 1)]
    return np.clip(np.column_stack(columns), UNIT_CLAMP, 1.0 - UNIT_CLAMP)

def _edge_copula(spec: DVineSpec, edge: Edge, u: np.ndarray) -> BivCopula:
    conditional = spec.conditional_edge
    if conditional is not None and conditional.position == edge:
        return conditional.copula_for(u)
    return spec.edges[edge]

def simulate(spec: DVineSpec, n: int, seed: int, replication: int = 0) -> PseudoSample:
    """Draw ``n`` observations from ``spec``.

    Deterministic in ``(spec, n, seed, replication)``.

    Raises:
        SizeError: If n < 1
        ConvergenceError: If an h-function inversion fails
    """
    if n < 1:
        raise SizeError("cannot simulate an empty sample", n=n, minimum=1)

    d = spec.d
    w = uniform_draws(seed, n, d, replication)
    u = np.zeros((n, d))
    u[:, 0] = w[:, 0]

    # forward[m] holds B(m, k) for the coordinate k being drawn
    forward: Dict[int, np.ndarray] = {}
    for k in range(2, d + 1):
        forward[k - 1] = u[:, k - 2]
        copulas = {j: _edge_copula(spec, (k - j, j), u) for j in range(1, k)}

        inverse: Dict[int, np.ndarray] = {k: w[:, k - 1]}
        with ErrorContext({"operation": "simulate", "coordinate": k}, NumericError):
            for j in range(k - 1, 0, -1):
                inverse[j] = np.asarray(copulas[j].hinv(inverse[j + 1], forward[k - j], "first"))
        u[:, k - 1] = inverse[1]

        if k < d:
            for m in range(1, k):
                forward[m] = np.asarray(copulas[k - m].hfunc(forward[m], inverse[k - m], "second"))

    logger.debug(f"Simulated {n}x{d} sample (seed={seed}, replication={replication})")
    return PseudoSample(np.clip(u, UNIT_CLAMP, 1.0 - UNIT_CLAMP))
