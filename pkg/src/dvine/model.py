"""
D-vine model description.

Edges are keyed ``(i, j)`` with 1-based indices: tree ``j`` couples variable
``i`` with variable ``i + j`` given the variables strictly between them.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..bivcop import BivCopula, FamilyTag, tau_to_param
from ..constants import (
    FAMILY_CLAYTON, FAMILY_FRANK, FUNCTIONAL_SUM, FUNCTIONAL_INTERACTION,
    FUNCTIONAL_DIFFERENCE, VALID_FUNCTIONALS, EXAMPLE_SMALL, EXAMPLE_DIMENSION
)
from ..exceptions import DomainError, ValidationError

logger = logging.getLogger("SVCT.DVine")

Edge = Tuple[int, int]

def edge_keys(d: int, up_to_tree: Optional[int] = None) -> Iterator[Edge]:
    """All edges of a d-dimensional D-vine, tree by tree"""
    last = d - 1 if up_to_tree is None else up_to_tree
    for j in range(1, last + 1):
        for i in range(1, d - j + 1):
            yield (i, j)

def conditioning_set(edge: Edge) -> List[int]:
    """1-based variables the edge conditions on"""
    i, j = edge
    return list(range(i + 1, i + j))

@dataclass(frozen=True)
class ParamFunctional:
    """Conditioning-dependent Frank parameter for the deliberately non-simplified edge"""

    kind: str = FUNCTIONAL_SUM
    lam: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", str(self.kind).lower())
        if self.kind not in VALID_FUNCTIONALS:
            raise DomainError(f"functional must be one of {VALID_FUNCTIONALS}",
                              parameter="functional", value=self.kind)
        if not 0.0 <= float(self.lam) <= 1.0:
            raise DomainError("lambda must lie in [0, 1]", parameter="lambda", value=self.lam)
        object.__setattr__(self, "lam", float(self.lam))

    def __call__(self, u2, u3):
        u2 = np.asarray(u2, dtype=float)
        u3 = np.asarray(u3, dtype=float)
        if self.kind == FUNCTIONAL_SUM:
            inner = 1.0 - 1.5 * (u2 + u3)
        elif self.kind == FUNCTIONAL_INTERACTION:
            inner = 1.0 - 2.0 * u2 * (u2 + u3)
        else:
            inner = 1.0 - 2.0 * (u2 - u3)
        return 1.0 + 2.5 * self.lam * inner ** 2

@dataclass(frozen=True)
class ConditionalEdge:
    """An edge whose parameter is a function of two conditioning coordinates"""

    position: Edge
    family: FamilyTag
    functional: ParamFunctional
    cond_vars: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        i, j = self.position
        if j < 2:
            raise DomainError("a conditional edge needs a nonempty conditioning set",
                              parameter="position", value=self.position)
        cond = conditioning_set(self.position)
        if self.cond_vars is None:
            chosen = (cond[0], cond[1] if len(cond) > 1 else cond[0])
            object.__setattr__(self, "cond_vars", chosen)
        if any(c not in cond for c in self.cond_vars):
            raise DomainError(f"conditioning variables must be among {cond}",
                              parameter="cond_vars", value=self.cond_vars)

    def copula_for(self, values: np.ndarray, first_var: int = 1) -> BivCopula:
        """Copula with one parameter per row of ``values``.

        ``values`` holds the columns of variables ``first_var, first_var + 1, ...``
        """
        a, b = (c - first_var for c in self.cond_vars)
        return BivCopula(self.family, self.functional(values[:, a], values[:, b]))

    def static_copula(self) -> BivCopula:
        """The copula this edge reduces to at lambda = 0"""
        return BivCopula(self.family, float(ParamFunctional(self.functional.kind, 0.0)(0.5, 0.5)))

@dataclass(frozen=True)
class DVineSpec:
    """Dimension, one copula per edge and an optional conditional edge"""

    d: int
    edges: Dict[Edge, BivCopula]
    conditional_edge: Optional[ConditionalEdge] = None

    def __post_init__(self):
        if self.d < 3:
            raise DomainError("a D-vine needs at least three variables", parameter="d", value=self.d)
        expected = set(edge_keys(self.d))
        if set(self.edges) != expected:
            missing = sorted(expected - set(self.edges))
            extra = sorted(set(self.edges) - expected)
            raise ValidationError(f"edge grid must contain exactly d(d-1)/2 = {len(expected)} edges "
                                  f"(missing {missing}, unexpected {extra})", field_name="edges")
        if self.conditional_edge is not None and self.conditional_edge.position not in expected:
            raise DomainError("conditional edge lies outside the vine",
                              parameter="position", value=self.conditional_edge.position)

    def copula(self, i: int, j: int) -> BivCopula:
        return self.edges[(i, j)]

    def tree(self, j: int) -> List[BivCopula]:
        return [self.edges[(i, j)] for i in range(1, self.d - j + 1)]

    def families(self) -> Dict[Edge, FamilyTag]:
        families = {edge: cop.family for edge, cop in self.edges.items()}
        if self.conditional_edge is not None:
            families[self.conditional_edge.position] = self.conditional_edge.family
        return families

    def copulas_for(self, values: np.ndarray, first_var: int = 1) -> Dict[Edge, BivCopula]:
        """Edge copulas with the conditional edge evaluated at the rows of ``values``"""
        copulas = dict(self.edges)
        if self.conditional_edge is not None:
            copulas[self.conditional_edge.position] = self.conditional_edge.copula_for(values, first_var)
        return copulas

    def true_copulas(self, values: np.ndarray, up_to_tree: Optional[int] = None) -> Dict[Edge, BivCopula]:
        """Data-generating copulas of trees 1..up_to_tree for the rows of ``values``"""
        last = self.d - 1 if up_to_tree is None else up_to_tree
        copulas = self.copulas_for(values)
        return {edge: copulas[edge] for edge in edge_keys(self.d, last)}

    def simplified(self) -> "DVineSpec":
        """The same grid with the conditional edge replaced by its lambda = 0 copula"""
        if self.conditional_edge is None:
            return self
        edges = dict(self.edges)
        edges[self.conditional_edge.position] = self.conditional_edge.static_copula()
        return DVineSpec(self.d, edges)

def clayton_tree_params(theta1: float, trees: int) -> List[float]:
    """theta_j = theta_1 / (1 + (j - 1) theta_1): the partial copulas of a Clayton copula"""
    return [theta1 / (1.0 + (j - 1) * theta1) for j in range(1, trees + 1)]

def clayton_dvine(d: int, tau: float) -> DVineSpec:
    """Simplified D-vine of the d-dimensional Clayton copula with Kendall's tau in tree 1"""
    theta1 = tau_to_param(FamilyTag(FAMILY_CLAYTON), tau)
    params = clayton_tree_params(theta1, d - 1)
    edges = {(i, j): BivCopula(FamilyTag(FAMILY_CLAYTON), params[j - 1]) for i, j in edge_keys(d)}
    return DVineSpec(d, edges)

def build_example_spec(which: str, tau: float, lam: float,
                       functional: str = FUNCTIONAL_SUM, d: Optional[int] = None) -> DVineSpec:
    """Simulation designs with a conditional Frank copula in the last tree.

    ``ex4.1`` is four-dimensional. ``ex5.1`` takes any ``d >= 4``. Trees
    1..d-2 hold Clayton copulas with theta_j = theta_1 / (1 + (j - 1) theta_1),
    theta_1 = 2 tau / (1 - tau); the top edge is Frank with parameter
    given by the functional of the first two conditioning coordinates.
    """
    which = str(which).lower()
    if which == EXAMPLE_SMALL:
        if d not in (None, 4):
            raise DomainError("ex4.1 is four-dimensional", parameter="d", value=d)
        d = 4
    elif which == EXAMPLE_DIMENSION:
        if d is None or d < 4:
            raise DomainError("ex5.1 needs d >= 4", parameter="d", value=d)
    else:
        raise DomainError(f"unknown example '{which}'", parameter="example", value=which)

    if not 0.0 < tau < 1.0:
        raise DomainError("tau must lie in (0, 1)", parameter="tau", value=tau)

    theta1 = tau_to_param(FamilyTag(FAMILY_CLAYTON), tau)
    params = clayton_tree_params(theta1, d - 2)
    clayton = FamilyTag(FAMILY_CLAYTON)
    frank = FamilyTag(FAMILY_FRANK)
    edges: Dict[Edge, BivCopula] = {}
    for i, j in edge_keys(d, d - 2):
        edges[(i, j)] = BivCopula(clayton, params[j - 1])

    conditional = ConditionalEdge((1, d - 1), frank, ParamFunctional(functional, lam))
    edges[(1, d - 1)] = conditional.static_copula()
    logger.debug(f"Built {which} spec: d={d}, theta={params}, lambda={lam}, functional={functional}")
    return DVineSpec(d, edges, conditional)

FamilySpec = Union[str, FamilyTag, Sequence[Union[str, FamilyTag]], Dict[Edge, Union[str, FamilyTag]]]

def family_grid(d: int, families: FamilySpec, up_to_tree: Optional[int] = None) -> Dict[Edge, FamilyTag]:
    """Normalize a family specification into one FamilyTag per edge.

    Accepts a single family for every edge, a sequence with one family per
    tree, or an explicit mapping from edge to family.
    """
    last = d - 1 if up_to_tree is None else up_to_tree

    def tag(value) -> FamilyTag:
        return value if isinstance(value, FamilyTag) else FamilyTag.parse(value)

    if isinstance(families, (str, FamilyTag)):
        one = tag(families)
        return {edge: one for edge in edge_keys(d, last)}
    if isinstance(families, dict):
        grid = {edge: tag(value) for edge, value in families.items()}
        missing = [edge for edge in edge_keys(d, last) if edge not in grid]
        if missing:
            raise ValidationError(f"no family given for edges {missing}", field_name="families")
        return grid
    per_tree = [tag(value) for value in families]
    if len(per_tree) < last:
        raise ValidationError(f"need a family for each of the first {last} trees, got {len(per_tree)}",
                              field_name="families")
    return {(i, j): per_tree[j - 1] for i, j in edge_keys(d, last)}
