"""
Pseudo-observations: samples on the unit hypercube and the rank transform.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy.stats import rankdata

from ..exceptions import DomainError, SizeError, ValidationError

logger = logging.getLogger("SVCT.DVine")

def default_labels(d: int) -> List[str]:
    return [f"u{k}" for k in range(1, d + 1)]

@dataclass(frozen=True)
class PseudoSample:
    """An n x d matrix with every entry strictly inside (0, 1)"""

    values: np.ndarray
    labels: List[str] = field(default_factory=list)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise ValidationError("a sample must be a two-dimensional matrix", field_name="values")
        if not np.all((values > 0.0) & (values < 1.0)):
            raise DomainError("pseudo-observations must lie strictly inside (0, 1)", parameter="values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        labels = list(self.labels) or default_labels(values.shape[1])
        if len(labels) != values.shape[1]:
            raise ValidationError(f"{len(labels)} labels for {values.shape[1]} columns", field_name="labels")
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def column(self, var: int) -> np.ndarray:
        """Column of 1-based variable ``var``"""
        return self.values[:, var - 1]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, columns=self.labels)

    def to_csv(self, path: str) -> None:
        """Write the sample with a header row"""
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        logger.debug(f"Wrote {self.n}x{self.d} sample to {path}")

    @classmethod
    def from_csv(cls, path: str, already_uniform: bool = False) -> "PseudoSample":
        """Read a CSV (header row, one column per variable).

        The rank transform is applied unless ``already_uniform`` is set.
        """
        frame = pd.read_csv(path)
        if frame.shape[1] < 2:
            raise ValidationError(f"{path} must have at least two columns", field_name="data")
        try:
            data = frame.to_numpy(dtype=float)
        except ValueError as e:
            raise ValidationError(f"{path} contains non-numeric values: {e}", field_name="data")
        labels = [str(c) for c in frame.columns]
        logger.info(f"Loaded {data.shape[0]} rows and {data.shape[1]} columns from {path}")
        if already_uniform:
            return cls(data, labels)
        return rank_pseudo_obs(data, labels)

def rank_pseudo_obs(data: Union[np.ndarray, pd.DataFrame],
                    labels: Optional[Sequence[str]] = None) -> PseudoSample:
    """Rescaled empirical distribution function, column by column.

    Entry (k, i) becomes #{m : data[m, i] <= data[k, i]} / (n + 1); tied
    values share the maximal rank.

    Raises:
        SizeError: If there are fewer than two rows
    """
    if isinstance(data, pd.DataFrame):
        labels = labels or [str(c) for c in data.columns]
        data = data.to_numpy(dtype=float)
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    n = data.shape[0]
    if n < 2:
        raise SizeError("rank pseudo-observations need at least two observations", n=n, minimum=2)
    if not np.all(np.isfinite(data)):
        raise DomainError("data contains missing or infinite values", parameter="data")
    ranks = rankdata(data, method="max", axis=0)
    return PseudoSample(ranks / (n + 1.0), list(labels) if labels else [])
