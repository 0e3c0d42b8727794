"""Shared carrier for extractor outputs."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DataError


class Source(str, Enum):
    GABOR = "gabor"
    LBP = "lbp"
    WD = "wd"
    AAM = "aam"
    PCA = "pca"


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    source: Source

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64).ravel()
        if not np.all(np.isfinite(vals)):
            raise DataError(f"{self.source.value} feature vector has non-finite entries")
        object.__setattr__(self, "values", vals)

    @property
    def dims(self) -> int:
        return self.values.size

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)
