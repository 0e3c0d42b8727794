import numpy as np
import pytest
from math import comb

from faceprobe.errors import DataError
from faceprobe.wavelet import (
    SubbandSet, band_order, daubechies8_filters, daubechies_filters, dwt2_level, idwt2_level,
    wavedec2, wavelet_features,
)


def numpy_daubechies(n):
    """Double-precision spectral factorisation with numpy.roots (oracle)."""
    p = [comb(n - 1 + k, k) for k in range(n)]
    q = np.array([1.0 + 0j])
    for y in np.roots(p[::-1]):
        a = 1 - 2 * y
        s = np.sqrt(a * a - 1 + 0j)
        z = a - s if abs(a - s) < 1 else a + s
        q = np.convolve(q, [1.0, -z])
    h = np.convolve(q, [comb(n, k) for k in range(n + 1)]).real
    return h * np.sqrt(2) / h.sum()


@pytest.fixture(scope="module")
def db8():
    return daubechies8_filters()


def test_db8_against_numpy_oracle(db8):
    np.testing.assert_allclose(db8.lowpass, numpy_daubechies(8), atol=1e-8)
    assert db8.taps == 16


def test_haar_case():
    f = daubechies_filters(1)
    np.testing.assert_allclose(f.lowpass, [2**-0.5, 2**-0.5], atol=1e-15)
    np.testing.assert_allclose(f.highpass, [2**-0.5, -(2**-0.5)], atol=1e-15)


def test_db8_sum_and_orthogonality(db8):
    h = db8.lowpass
    assert abs(h.sum() - np.sqrt(2)) <= 1e-12
    for k in range(8):
        dot = np.dot(h[2 * k:], h[:h.size - 2 * k])
        assert abs(dot - (1.0 if k == 0 else 0.0)) <= 1e-10


def test_db8_vanishing_moments(db8):
    g = db8.highpass
    j = np.arange(g.size, dtype=float)
    for p in range(8):
        assert abs(np.sum(j**p * g)) <= 1e-6 * max(1.0, np.sum(np.abs(j**p * g)))


def test_highpass_is_alternating_flip(db8):
    h, g = db8.lowpass, db8.highpass
    L = h.size
    for j in range(L):
        assert g[j] == (-1) ** j * h[L - 1 - j]


def test_energy_conservation(db8, rng):
    for _ in range(10):
        img = rng.normal(size=(64, 64))
        dec = wavedec2(img, db8, 2)
        energy = sum(np.sum(b**2) for b in dec.bands.values())
        assert abs(energy - np.sum(img**2)) <= 1e-9 * np.sum(img**2)


def test_constant_image(db8):
    dec = wavedec2(np.full((64, 64), 3.5), db8, 2)
    np.testing.assert_allclose(dec.bands["LLLL"], 4 * 3.5, atol=1e-9)
    for name in ("HL", "LH", "HH", "HLLL", "LHLL", "HHLL"):
        np.testing.assert_allclose(dec.bands[name], 0.0, atol=1e-9)


def test_perfect_reconstruction(db8, rng):
    img = rng.normal(size=(32, 48))
    one = dwt2_level(img, db8)
    np.testing.assert_allclose(idwt2_level(one, db8), img, atol=1e-10)


def test_critical_sampling(db8, rng):
    dec = wavedec2(rng.normal(size=(64, 40)), db8, 2)
    assert dec.coefficient_count() == 64 * 40
    assert dec.bands["LLLL"].shape == (16, 10)
    assert dec.bands["HL"].shape == (32, 20)


def test_band_naming_rows_first(db8):
    """A pattern varying only along rows (horizontal direction) lands in HL."""
    x = np.tile(np.where(np.arange(32) % 2 == 0, 1.0, -1.0), (32, 1))
    one = dwt2_level(x, db8).bands
    assert np.sum(one["HL"] ** 2) == pytest.approx(np.sum(x**2), rel=1e-9)


def test_odd_size_is_padded(db8, rng):
    dec = wavedec2(rng.normal(size=(65, 60)), db8, 2)
    assert dec.bands["HL"].shape == (33, 30)
    assert dec.bands["LLLL"].shape == (17, 15)


def test_features_order(db8, rng):
    img = rng.normal(size=(16, 16))
    dec = wavedec2(img, db8, 2)
    fv = wavelet_features(img, db8, 2)
    expected = np.concatenate([dec.bands[b].ravel() for b in band_order(2)])
    np.testing.assert_array_equal(fv.values, expected)
    assert band_order(2) == ["LLLL", "HLLL", "LHLL", "HHLL", "HL", "LH", "HH"]


def test_bad_levels(db8):
    with pytest.raises(DataError):
        wavedec2(np.zeros((8, 8)), db8, 0)
    with pytest.raises(DataError):
        daubechies_filters(0)
