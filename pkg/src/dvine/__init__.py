"""
D-vine models: specification, simulation, rank pseudo-observations,
stepwise fitting and PPIT propagation.
"""

from .model import (
    Edge,
    DVineSpec,
    ConditionalEdge,
    ParamFunctional,
    edge_keys,
    conditioning_set,
    clayton_dvine,
    clayton_tree_params,
    build_example_spec,
    family_grid
)
from .sample import PseudoSample, rank_pseudo_obs
from .simulate import simulate, substream, uniform_draws
from .fit import FittedTrees, fit_pair, stepwise_fit, compute_ppits, propagate_pairs

__all__ = [
    "Edge", "DVineSpec", "ConditionalEdge", "ParamFunctional", "edge_keys", "conditioning_set",
    "clayton_dvine", "clayton_tree_params", "build_example_spec", "family_grid",
    "PseudoSample", "rank_pseudo_obs",
    "simulate", "substream", "uniform_draws",
    "FittedTrees", "fit_pair", "stepwise_fit", "compute_ppits", "propagate_pairs"
]
