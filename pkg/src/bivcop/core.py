"""
Bivariate copula values: family tag, parameter, and the evaluation functions.

All functions accept scalars or numpy arrays and broadcast ``u``, ``v`` and
the copula parameter against each other. Unit-interval inputs are clamped to
``[1e-10, 1 - 1e-10]``; values outside ``[0, 1]`` raise :class:`DomainError`.
A parameter equal to the family's independence value is evaluated as the
product copula.
"""
from dataclasses import dataclass
from typing import Any, Callable, Dict, Literal, Union

import numpy as np

from ..constants import (
    FAMILY_INDEPENDENCE, FAMILY_ALIASES, ROTATION_NONE, ROTATION_SURVIVAL,
    VALID_ROTATIONS, UNIT_CLAMP
)
from ..exceptions import DomainError
from .base import CopulaFamily
from .registry import get_family

Which = Literal["first", "second"]
ArrayLike = Union[float, np.ndarray]

@dataclass(frozen=True)
class FamilyTag:
    """Family name plus rotation (0 or 180 degrees)"""

    name: str
    rotation: int = ROTATION_NONE

    def __post_init__(self):
        object.__setattr__(self, "name", str(self.name).strip().lower())
        object.__setattr__(self, "rotation", int(self.rotation))
        get_family(self.name)
        if self.rotation not in VALID_ROTATIONS:
            raise DomainError(f"rotation must be one of {VALID_ROTATIONS}",
                              parameter="rotation", value=self.rotation)
        if self.name == FAMILY_INDEPENDENCE and self.rotation != ROTATION_NONE:
            raise DomainError("the independence copula admits no rotation",
                              parameter="rotation", value=self.rotation)

    @classmethod
    def parse(cls, text: str) -> "FamilyTag":
        """Parse names such as ``clayton``, ``gumbel180`` or ``survival-gumbel``"""
        key = str(text).strip().lower()
        if key in FAMILY_ALIASES:
            name, rotation = FAMILY_ALIASES[key]
            return cls(name, rotation)
        if key.endswith("180"):
            return cls(key[:-3].rstrip("-_"), ROTATION_SURVIVAL)
        return cls(key, ROTATION_NONE)

    @property
    def family(self) -> CopulaFamily:
        return get_family(self.name)

    @property
    def label(self) -> str:
        if self.rotation == ROTATION_SURVIVAL:
            return f"survival-{self.name}"
        return self.name

    def __str__(self) -> str:
        return self.label

INDEPENDENCE = FamilyTag(FAMILY_INDEPENDENCE)

@dataclass(frozen=True, eq=False)
class BivCopula:
    """A parametrized pair copula.

    ``theta`` is normally a float. An array is accepted for copulas whose
    parameter varies per observation (conditional edges during simulation).
    """

    family: FamilyTag
    theta: ArrayLike = 0.0

    def __post_init__(self):
        if isinstance(self.family, str):
            object.__setattr__(self, "family", FamilyTag.parse(self.family))
        theta = np.asarray(self.theta, dtype=float)
        object.__setattr__(self, "theta", float(theta) if theta.ndim == 0 else theta)
        if not np.all(self.family.family.admissible(theta)):
            raise DomainError(f"parameter outside the admissible range of the {self.family.label} family",
                              parameter="theta", value=self.theta)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, BivCopula):
            return NotImplemented
        return self.family == other.family and np.array_equal(self.theta, other.theta)

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def independence(cls) -> "BivCopula":
        return cls(INDEPENDENCE, 0.0)

    @property
    def is_independence(self) -> bool:
        fam = self.family.family
        return not fam.has_parameter or bool(np.all(np.asarray(self.theta) == fam.independence_value))

    @property
    def tau(self) -> float:
        return param_to_tau(self.family, float(np.asarray(self.theta)))

    def cdf(self, u: ArrayLike, v: ArrayLike) -> ArrayLike:
        return cdf(self, u, v)

    def log_density(self, u: ArrayLike, v: ArrayLike) -> ArrayLike:
        return log_density(self, u, v)

    def density(self, u: ArrayLike, v: ArrayLike) -> ArrayLike:
        return np.exp(log_density(self, u, v))

    def hfunc(self, u: ArrayLike, v: ArrayLike, which: Which = "second") -> ArrayLike:
        return hfunc(self, u, v, which)

    def hinv(self, p: ArrayLike, given: ArrayLike, which: Which = "second") -> ArrayLike:
        return hinv(self, p, given, which)

    def score(self, u: ArrayLike, v: ArrayLike) -> ArrayLike:
        return score(self, u, v)

    def with_theta(self, theta: ArrayLike) -> "BivCopula":
        return BivCopula(self.family, theta)

    def to_dict(self) -> Dict[str, Any]:
        return {"family": self.family.name, "rotation": self.family.rotation,
                "theta": float(np.asarray(self.theta))}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BivCopula":
        return cls(FamilyTag(data["family"], data.get("rotation", ROTATION_NONE)), data.get("theta", 0.0))

    def __repr__(self) -> str:
        theta = self.theta if isinstance(self.theta, float) else f"array{np.shape(self.theta)}"
        return f"BivCopula({self.family.label}, theta={theta})"

def _unit(x: ArrayLike, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        raise DomainError(f"{name} must lie in [0, 1]", parameter=name)
    return np.clip(arr, UNIT_CLAMP, 1.0 - UNIT_CLAMP)

def _evaluate(cop: BivCopula, method: str, a: np.ndarray, b: np.ndarray,
              limit_fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
    """Run ``family.<method>`` on the regular entries and ``limit_fn`` on independence-limit entries"""
    fam = cop.family.family
    theta = np.asarray(cop.theta, dtype=float)
    shape = np.broadcast(a, b, theta).shape
    a, b, theta = (np.ravel(np.broadcast_to(x, shape)) for x in (a, b, theta))

    if not fam.has_parameter:
        return np.asarray(getattr(fam, method)(a, b, theta), dtype=float).reshape(shape)

    regular = theta != fam.independence_value
    out = np.empty(a.shape)
    if (~regular).any():
        out[~regular] = limit_fn(a[~regular], b[~regular])
    if regular.any():
        out[regular] = getattr(fam, method)(a[regular], b[regular], theta[regular])
    return out.reshape(shape)

def _out(values: np.ndarray) -> ArrayLike:
    return float(values) if np.ndim(values) == 0 else values

def cdf(cop: BivCopula, u: ArrayLike, v: ArrayLike) -> ArrayLike:
    """C(u, v) for u, v in [0, 1]; exact on the boundary of the square"""
    raw_u, raw_v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    a, b = _unit(raw_u, "u"), _unit(raw_v, "v")
    independent = lambda x, y: x * y

    if cop.family.rotation == ROTATION_SURVIVAL:
        base = _evaluate(cop, "cdf", 1.0 - a, 1.0 - b, independent)
        values = a + b - 1.0 + base
    else:
        values = _evaluate(cop, "cdf", a, b, independent)

    raw_u, raw_v = np.broadcast_arrays(raw_u, raw_v)
    values = np.where(raw_v == 1.0, raw_u, values)
    values = np.where(raw_u == 1.0, raw_v, values)
    values = np.where((raw_u == 0.0) | (raw_v == 0.0), 0.0, values)
    lower = np.maximum(raw_u + raw_v - 1.0, 0.0)
    upper = np.minimum(raw_u, raw_v)
    return _out(np.clip(values, lower, upper))

def log_density(cop: BivCopula, u: ArrayLike, v: ArrayLike) -> ArrayLike:
    """log c(u, v)"""
    a, b = _unit(u, "u"), _unit(v, "v")
    zero = lambda x, y: np.zeros_like(x)
    if cop.family.rotation == ROTATION_SURVIVAL:
        a, b = 1.0 - a, 1.0 - b
    return _out(_evaluate(cop, "log_pdf", a, b, zero))

def hfunc(cop: BivCopula, u: ArrayLike, v: ArrayLike, which: Which = "second") -> ArrayLike:
    """Conditional distribution function from a partial derivative of C.

    ``which="second"`` returns dC/dv at (u, v), the cdf of U given V = v.
    ``which="first"`` returns dC/du at (u, v), the cdf of V given U = u.
    """
    a, b = _unit(u, "u"), _unit(v, "v")
    if which == "first":
        a, b = b, a
    elif which != "second":
        raise DomainError("which must be 'first' or 'second'", parameter="which", value=which)

    identity = lambda x, y: x
    if cop.family.rotation == ROTATION_SURVIVAL:
        values = 1.0 - _evaluate(cop, "h2", 1.0 - a, 1.0 - b, identity)
    else:
        values = _evaluate(cop, "h2", a, b, identity)
    return _out(np.clip(values, 0.0, 1.0))

def hinv(cop: BivCopula, p: ArrayLike, given: ArrayLike, which: Which = "second") -> ArrayLike:
    """Inverse of :func:`hfunc` in its free argument.

    ``which="second"``: the u with hfunc(u, given, "second") = p.
    ``which="first"``: the v with hfunc(given, v, "first") = p.
    """
    if which not in ("first", "second"):
        raise DomainError("which must be 'first' or 'second'", parameter="which", value=which)
    q, g = _unit(p, "p"), _unit(given, "given")

    identity = lambda x, y: x
    if cop.family.rotation == ROTATION_SURVIVAL:
        values = 1.0 - _evaluate(cop, "hinv2", 1.0 - q, 1.0 - g, identity)
    else:
        values = _evaluate(cop, "hinv2", q, g, identity)
    return _out(np.clip(values, UNIT_CLAMP, 1.0 - UNIT_CLAMP))

def score(cop: BivCopula, u: ArrayLike, v: ArrayLike) -> ArrayLike:
    """Analytic derivative of log c(u, v) in the parameter

    Raises:
        UnsupportedOperationError: For the independence family
    """
    fam = cop.family.family
    a, b = _unit(u, "u"), _unit(v, "v")
    if cop.family.rotation == ROTATION_SURVIVAL:
        a, b = 1.0 - a, 1.0 - b
    return _out(_evaluate(cop, "score", a, b, fam.score_at_independence))

def tau_to_param(family: FamilyTag, tau: float) -> float:
    """Parameter attaining Kendall's tau; 180 degree rotation keeps tau

    Raises:
        DomainError: If the family cannot attain ``tau``
    """
    if isinstance(family, str):
        family = FamilyTag.parse(family)
    return float(family.family.theta_from_tau(float(tau)))

def param_to_tau(family: FamilyTag, theta: float) -> float:
    """Kendall's tau of the copula with parameter ``theta``"""
    if isinstance(family, str):
        family = FamilyTag.parse(family)
    fam = family.family
    if not np.all(fam.admissible(theta)):
        raise DomainError(f"parameter outside the admissible range of the {family.label} family",
                          parameter="theta", value=theta)
    if fam.has_parameter and theta == fam.independence_value:
        return 0.0
    return float(fam.tau(theta))
