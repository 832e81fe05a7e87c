"""
Family interface for one-parameter bivariate copulas.

Every method works on the unrotated copula and is vectorized: ``u``, ``v``
and ``theta`` are numpy arrays of a common (broadcast) shape whose entries
lie strictly inside the unit square. Rotation, clamping and the
independence limit are handled by :mod:`src.bivcop.core`.
"""
from abc import ABC, abstractmethod
from typing import Dict, Optional, Tuple

import numpy as np

class CopulaFamily(ABC):
    """Base class for copula families"""

    #: registry name
    name: str = ""
    #: parameter value at which the family reduces to the product copula
    independence_value: float = 0.0
    #: bounds searched by the stepwise maximum-likelihood fit
    fit_bounds: Tuple[float, float] = (0.0, 0.0)
    #: whether the family has a parameter at all
    has_parameter: bool = True

    @abstractmethod
    def admissible(self, theta: np.ndarray) -> np.ndarray:
        """Elementwise admissibility of ``theta``, independence limit included"""

    @abstractmethod
    def cdf(self, u: np.ndarray, v: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """C(u, v)"""

    @abstractmethod
    def log_pdf(self, u: np.ndarray, v: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """log c(u, v)"""

    @abstractmethod
    def h2(self, u: np.ndarray, v: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """dC/dv at (u, v): conditional cdf of U given V = v"""

    @abstractmethod
    def hinv2(self, p: np.ndarray, v: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """Solve h2(u, v) = p for u"""

    @abstractmethod
    def score(self, u: np.ndarray, v: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """d/dtheta log c(u, v)"""

    def score_at_independence(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Limit of the score at the independence parameter"""
        theta = np.full(np.shape(u), self.independence_value, dtype=float)
        return self.score(u, v, theta)

    @abstractmethod
    def tau(self, theta: float) -> float:
        """Kendall's tau of the unrotated copula"""

    @abstractmethod
    def theta_from_tau(self, tau: float) -> float:
        """Inverse of :meth:`tau`"""

    def safe_theta(self) -> float:
        """A regular parameter substituted where the independence limit is dispatched"""
        lo, hi = self.fit_bounds
        return 0.5 * (lo + hi) if hi > lo else 1.0

class FamilyManager:
    """Holds the copula families known to the toolkit"""

    def __init__(self):
        self.families: Dict[str, CopulaFamily] = {}

    def register_family(self, family: CopulaFamily, name: Optional[str] = None) -> None:
        """Register a copula family

        Args:
            family: Family instance
            name: Registry name (default: ``family.name``)
        """
        self.families[(name or family.name).lower()] = family

    def get_family(self, name: str) -> Optional[CopulaFamily]:
        """Get a family by name

        Returns:
            Optional[CopulaFamily]: Family or None if not registered
        """
        return self.families.get(name.lower())

    def names(self):
        return sorted(self.families)
