"""Gabor wavelet bank, bank convolution and grid-sampled magnitude jets."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from . import kernels
from .errors import DataError
from .features import FeatureVector, Source

DEFAULT_SIGMA = 2 * np.pi
DEFAULT_K_MAX = np.pi / 2
DEFAULT_F = np.sqrt(2.0)
DEFAULT_GRID_STEP = 4


@dataclass(frozen=True)
class GaborBank:
    sigma: float
    k_max: float
    f: float
    n_scales: int
    n_orients: int
    kernel_size: int
    # (n_scales, n_orients, kernel_size, kernel_size), complex
    kernels: np.ndarray = field(repr=False, compare=False)

    @property
    def center(self) -> tuple[int, int]:
        c = self.kernel_size // 2
        return c, c

    @property
    def n_kernels(self) -> int:
        return self.n_scales * self.n_orients

    def scale_magnitude(self, nu: int) -> float:
        return self.k_max / self.f**nu

    def orientation(self, mu: int) -> float:
        return np.pi * mu / self.n_orients

    def wave_vector(self, mu: int, nu: int) -> complex:
        return self.scale_magnitude(nu) * np.exp(1j * self.orientation(mu))

    def flat_kernels(self) -> np.ndarray:
        """Kernels as (n_kernels, k, k), scale-major then orientation."""
        k = self.kernel_size
        return self.kernels.reshape(self.n_kernels, k, k)

    def params(self) -> dict:
        return {
            "sigma": self.sigma, "k_max": self.k_max, "f": self.f,
            "n_scales": self.n_scales, "n_orients": self.n_orients,
            "kernel_size": self.kernel_size,
        }


def gabor_kernel(wave_vector: complex, sigma: float, kernel_size: int) -> np.ndarray:
    """Sample one DC-compensated Gabor kernel on integer offsets from the centre."""
    c = kernel_size // 2
    off = np.arange(kernel_size, dtype=np.float64) - c
    y, x = np.meshgrid(off, off, indexing="ij")
    kx, ky = wave_vector.real, wave_vector.imag
    k2 = kx * kx + ky * ky
    envelope = (k2 / sigma**2) * np.exp(-k2 * (x * x + y * y) / (2 * sigma**2))
    return envelope * (np.exp(1j * (kx * x + ky * y)) - np.exp(-sigma**2 / 2))


def build_gabor_bank(sigma: float = DEFAULT_SIGMA, k_max: float = DEFAULT_K_MAX,
                     f: float = DEFAULT_F, n_scales: int = 5, n_orients: int = 8,
                     kernel_size: int = 32) -> GaborBank:
    """Build the n_scales x n_orients bank, orientations spaced pi/n_orients apart."""
    if not (sigma > 0 and k_max > 0 and f > 0):
        raise DataError("sigma, k_max and f must be positive")
    if n_scales < 1 or n_orients < 1:
        raise DataError("n_scales and n_orients must be >= 1")
    if kernel_size < 3:
        raise DataError("kernel_size must be >= 3")
    bank = GaborBank(float(sigma), float(k_max), float(f), int(n_scales), int(n_orients),
                     int(kernel_size), np.empty(0))
    ks = np.empty((n_scales, n_orients, kernel_size, kernel_size), dtype=np.complex128)
    for nu in range(n_scales):
        for mu in range(n_orients):
            ks[nu, mu] = gabor_kernel(bank.wave_vector(mu, nu), sigma, kernel_size)
    ks.setflags(write=False)
    object.__setattr__(bank, "kernels", ks)
    return bank


def convolve_bank(img, bank: GaborBank, method: str = "fft") -> np.ndarray:
    """Convolve ``img`` with every kernel; zero-padded borders, same-size output.

    Returns a complex (n_kernels, rows, cols) stack. ``method="direct"`` runs
    the spatial loop in the compiled kernel core; ``"fft"`` computes the same
    linear convolution in the transform domain.
    """
    img = np.asarray(img, dtype=np.float64)
    rows, cols = img.shape
    ks = bank.flat_kernels()
    cy, cx = bank.center
    if method == "direct":
        return np.stack([kernels.conv2d_same(img, k, (cy, cx)) for k in ks])
    if method != "fft":
        raise DataError(f"unknown convolution method {method!r}")
    kr = kc = bank.kernel_size
    shape = (scipy.fft.next_fast_len(rows + kr - 1), scipy.fft.next_fast_len(cols + kc - 1))
    spec_img = scipy.fft.fft2(img, s=shape)
    spec_k = scipy.fft.fft2(ks, s=shape, axes=(-2, -1))
    full = scipy.fft.ifft2(spec_k * spec_img, axes=(-2, -1))
    return np.ascontiguousarray(full[:, cy:cy + rows, cx:cx + cols])


def sample_grid(responses: np.ndarray, grid_step: int) -> np.ndarray:
    """Magnitudes at rows/cols divisible by ``grid_step``, flattened per kernel."""
    return np.abs(responses[:, ::grid_step, ::grid_step]).reshape(-1)


def gabor_features(img, bank: GaborBank, grid_step: int = DEFAULT_GRID_STEP,
                   method: str = "fft") -> FeatureVector:
    if grid_step < 1:
        raise DataError("grid_step must be >= 1")
    responses = convolve_bank(img, bank, method=method)
    return FeatureVector(sample_grid(responses, grid_step), Source.GABOR)


def feature_dims(rows: int, cols: int, grid_step: int, bank: GaborBank) -> int:
    return bank.n_kernels * (-(-rows // grid_step)) * (-(-cols // grid_step))
