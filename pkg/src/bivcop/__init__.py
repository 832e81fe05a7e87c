"""
Bivariate copula families: distribution functions, densities, h-functions,
their inverses, parameter scores and Kendall's tau conversions.
"""

from .base import CopulaFamily, FamilyManager
from .registry import get_family_manager, get_family, find_family
from .core import (
    FamilyTag,
    BivCopula,
    INDEPENDENCE,
    cdf,
    log_density,
    hfunc,
    hinv,
    score,
    tau_to_param,
    param_to_tau
)

__all__ = [
    "CopulaFamily", "FamilyManager", "get_family_manager", "get_family", "find_family",
    "FamilyTag", "BivCopula", "INDEPENDENCE",
    "cdf", "log_density", "hfunc", "hinv", "score", "tau_to_param", "param_to_tau"
]
