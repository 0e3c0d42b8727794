"""Eigenface PCA with the small Gram-matrix trick.

The covariance is scaled by 1/M (M = sample count), so eigenvalues are the
biased variance along each component.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericError
from .features import FeatureVector, Source

NULL_EIGENVALUE_RATIO = 1e-12


@dataclass
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (dim, n_components), orthonormal columns
    eigenvalues: np.ndarray  # retained, descending
    total_variance: float  # sum over all non-null eigenvalues

    @property
    def n_components(self) -> int:
        return self.components.shape[1]

    @property
    def dim(self) -> int:
        return self.mean.size

    def project(self, v) -> np.ndarray:
        """Weights for one vector (1-D) or a stack of row vectors (2-D)."""
        v = np.asarray(v, dtype=np.float64)
        if v.shape[-1] != self.dim:
            raise DataError(f"PCA expects {self.dim}-dim vectors, got {v.shape[-1]}")
        return (v - self.mean) @ self.components

    def reconstruct(self, weights) -> np.ndarray:
        return self.mean + np.asarray(weights) @ self.components.T


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each column made positive
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def _eigh_desc(mat: np.ndarray):
    vals, vecs = np.linalg.eigh(mat)
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def _retained(eigenvalues: np.ndarray, n_components) -> int:
    avail = eigenvalues.size
    if n_components is None:
        return avail
    if isinstance(n_components, float):
        frac = n_components
        if not 0 < frac <= 1:
            raise DataError(f"variance fraction must lie in (0, 1], got {frac}")
        cum = np.cumsum(eigenvalues)
        need = frac * cum[-1]
        # small relative slack so a fraction of exactly 1 keeps every mode
        k = int(np.searchsorted(cum, need * (1 - 1e-12), side="left")) + 1
        return min(k, avail)
    k = int(n_components)
    if k < 1:
        raise DataError(f"n_components must be >= 1, got {k}")
    return min(k, avail)


def fit_pca(vectors, n_components: int | float | None = None) -> PcaModel:
    """Fit on M row vectors; ``n_components`` is a count, a variance fraction
    in (0, 1), or None for every non-null component (at most M - 1)."""
    if isinstance(vectors, np.ndarray):
        x = np.asarray(vectors, dtype=np.float64)
    else:
        x = np.stack([np.asarray(v, dtype=np.float64) for v in vectors])
    if x.ndim != 2 or x.shape[0] < 2:
        raise DataError("PCA needs at least two vectors of equal length")
    m, dim = x.shape
    mean = x.mean(axis=0)
    a = (x - mean).T / np.sqrt(m)  # C = A A^T
    if dim > m:
        vals, small = _eigh_desc(a.T @ a)
        vecs = a @ small
    else:
        vals, vecs = _eigh_desc(a @ a.T)
    if vals.size == 0 or not vals[0] > 0:
        raise DataError("all vectors are identical; PCA has no variance to model")
    keep = vals > NULL_EIGENVALUE_RATIO * vals[0]
    keep[min(m - 1, dim):] = False
    vals = np.clip(vals[keep], 0.0, None)
    vecs = vecs[:, keep]
    if dim > m:
        norms = np.linalg.norm(vecs, axis=0)
        if np.any(norms == 0):
            raise NumericError("Gram-trick eigenvector collapsed to zero")
        vecs = vecs / norms
    vecs = _fix_signs(vecs)
    k = _retained(vals, n_components)
    return PcaModel(mean=mean, components=np.ascontiguousarray(vecs[:, :k]),
                    eigenvalues=vals[:k].copy(), total_variance=float(vals.sum()))


def project(model: PcaModel, v) -> FeatureVector:
    return FeatureVector(model.project(np.asarray(v, dtype=np.float64)), Source.PCA)
