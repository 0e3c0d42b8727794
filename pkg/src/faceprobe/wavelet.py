"""Separable 2-D wavelet decomposition with Daubechies filters.

Band names use the row (horizontal) filter first and the column filter
second: ``HL`` is highpass along rows, lowpass along columns. Second-level
bands append ``LL`` (``HLLL`` is the HL band of the first-level LL).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import mpmath
import numpy as np

from . import kernels
from .features import FeatureVector, Source
from .errors import DataError

DEFAULT_LEVELS = 2


@dataclass(frozen=True)
class WaveletFilters:
    lowpass: np.ndarray
    highpass: np.ndarray
    family_tag: str

    @property
    def taps(self) -> int:
        return self.lowpass.size


@functools.lru_cache(maxsize=None)
def _daubechies_taps(n_moments: int) -> tuple[float, ...]:
    # Spectral factorisation of the maxflat half-band polynomial at 60 digits,
    # keeping the roots inside the unit circle (extremal phase).
    with mpmath.workdps(60):
        n = n_moments
        p = [mpmath.binomial(n - 1 + k, k) for k in range(n)]
        y_roots = mpmath.polyroots(p[::-1], maxsteps=500, extraprec=400) if n > 1 else []
        q = [mpmath.mpc(1)]
        for y in y_roots:
            a = 1 - 2 * y
            s = mpmath.sqrt(a * a - 1)
            z = a - s if abs(a - s) < 1 else a + s
            q = [(q[i] if i < len(q) else 0) - z * (q[i - 1] if i > 0 else 0)
                 for i in range(len(q) + 1)]
        binom = [mpmath.binomial(n, k) for k in range(n + 1)]
        h = [mpmath.fsum(binom[i] * q[k - i] for i in range(len(binom)) if 0 <= k - i < len(q))
             for k in range(len(binom) + len(q) - 1)]
        h = [mpmath.re(v) for v in h]
        scale = mpmath.sqrt(2) / mpmath.fsum(h)
        return tuple(float(v * scale) for v in h)


def daubechies_filters(n_moments: int) -> WaveletFilters:
    if n_moments < 1:
        raise DataError("a Daubechies filter needs at least one vanishing moment")
    h0 = np.array(_daubechies_taps(n_moments))
    signs = np.where(np.arange(h0.size) % 2 == 0, 1.0, -1.0)
    h1 = signs * h0[::-1]
    h0.setflags(write=False)
    h1.setflags(write=False)
    return WaveletFilters(h0, h1, f"db{n_moments}")


def daubechies8_filters() -> WaveletFilters:
    """16-tap orthonormal Daubechies filter pair with 8 vanishing moments."""
    return daubechies_filters(8)


@dataclass
class SubbandSet:
    level: int
    bands: dict[str, np.ndarray]

    def coefficient_count(self) -> int:
        return sum(b.size for b in self.bands.values())


def _pad_even(img: np.ndarray) -> np.ndarray:
    rows, cols = img.shape
    if rows % 2:
        img = np.vstack([img, img[-1:, :]])
    if cols % 2:
        img = np.hstack([img, img[:, -1:]])
    return img


def dwt2_level(img, filters: WaveletFilters) -> SubbandSet:
    """One level: filter + decimate along rows, then along columns."""
    x = _pad_even(np.asarray(img, dtype=np.float64))
    h0, h1 = filters.lowpass, filters.highpass
    lo, hi = kernels.analysis_rows(x, h0, h1)
    ll_t, lh_t = kernels.analysis_rows(lo.T, h0, h1)
    hl_t, hh_t = kernels.analysis_rows(hi.T, h0, h1)
    return SubbandSet(1, {"LL": ll_t.T, "HL": hl_t.T, "LH": lh_t.T, "HH": hh_t.T})


def _synthesis_rows(lo: np.ndarray, hi: np.ndarray, filters: WaveletFilters) -> np.ndarray:
    rows, half = lo.shape
    n = 2 * half
    taps = filters.taps
    out = np.zeros((rows, n))
    m = np.arange(half)
    for j in range(taps):
        idx = (2 * m + taps - 1 - j) % n
        np.add.at(out, (slice(None), idx), filters.lowpass[j] * lo + filters.highpass[j] * hi)
    return out


def idwt2_level(bands: SubbandSet, filters: WaveletFilters) -> np.ndarray:
    """Inverse of :func:`dwt2_level` for even-sized inputs (transpose of the analysis)."""
    b = bands.bands
    lo = _synthesis_rows(b["LL"].T, b["LH"].T, filters).T
    hi = _synthesis_rows(b["HL"].T, b["HH"].T, filters).T
    return _synthesis_rows(lo, hi, filters)


def wavedec2(img, filters: WaveletFilters, levels: int = DEFAULT_LEVELS) -> SubbandSet:
    """Recursive decomposition of the LL band, ``levels`` deep."""
    if levels < 1:
        raise DataError("levels must be >= 1")
    bands: dict[str, np.ndarray] = {}
    current = np.asarray(img, dtype=np.float64)
    suffix = ""
    for _ in range(levels):
        one = dwt2_level(current, filters).bands
        for name in ("HL", "LH", "HH"):
            bands[name + suffix] = one[name]
        current = one["LL"]
        suffix += "LL"
    bands["LL" * levels] = current
    return SubbandSet(levels, bands)


def band_order(levels: int) -> list[str]:
    """Deepest LL, deepest HL/LH/HH, then shallower details outward."""
    deepest = "LL" * (levels - 1)
    order = ["LL" + deepest]
    for lv in range(levels, 0, -1):
        suffix = "LL" * (lv - 1)
        order += ["HL" + suffix, "LH" + suffix, "HH" + suffix]
    return order


def wavelet_features(img, filters: WaveletFilters | None = None,
                     levels: int = DEFAULT_LEVELS) -> FeatureVector:
    filters = filters or daubechies8_filters()
    dec = wavedec2(img, filters, levels)
    parts = [dec.bands[name].ravel() for name in band_order(levels)]
    return FeatureVector(np.concatenate(parts), Source.WD)
