import os
import subprocess
import sys

import numpy as np
import pytest

from faceprobe import _pykernels, kernels

try:
    from faceprobe import _ckernels
except ImportError:  # extension not built
    _ckernels = None

needs_c = pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")


@needs_c
def test_lbp_codes_backends_agree(rng):
    for _ in range(20):
        img = rng.integers(0, 4, size=(rng.integers(3, 20), rng.integers(3, 20))).astype(float)
        np.testing.assert_array_equal(kernels.lbp_codes(img, _ckernels),
                                      kernels.lbp_codes(img, _pykernels))


@needs_c
def test_conv2d_backends_agree(rng):
    img = rng.normal(size=(17, 23))
    ker = rng.normal(size=(5, 7)) + 1j * rng.normal(size=(5, 7))
    for center in [(2, 3), (0, 0), (4, 6)]:
        a = kernels.conv2d_same(img, ker, center, _ckernels)
        b = kernels.conv2d_same(img, ker, center, _pykernels)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


def test_conv2d_matches_scipy_full_convolution(rng):
    from scipy.signal import convolve2d

    img = rng.normal(size=(12, 9))
    ker = rng.normal(size=(4, 5)) + 1j * rng.normal(size=(4, 5))
    cy, cx = 2, 2
    full = convolve2d(img, ker, mode="full")
    expected = full[cy:cy + 12, cx:cx + 9]
    np.testing.assert_allclose(kernels.conv2d_same(img, ker, (cy, cx)), expected, atol=1e-12)


@needs_c
def test_bilinear_backends_agree(rng):
    img = rng.normal(size=(11, 13))
    xs = rng.uniform(-2, 15, size=500)
    ys = rng.uniform(-2, 13, size=500)
    xs[:3] = [np.nan, 0.0, 12.0]
    np.testing.assert_array_equal(kernels.bilinear_sample(img, xs, ys, _ckernels),
                                  kernels.bilinear_sample(img, xs, ys, _pykernels))


def test_bilinear_exact_at_integer_points(rng):
    img = rng.normal(size=(6, 7))
    yy, xx = np.mgrid[0:6, 0:7].astype(float)
    np.testing.assert_array_equal(kernels.bilinear_sample(img, xx, yy), img)


def test_bilinear_outside_reads_are_zero():
    img = np.ones((4, 4))
    out = kernels.bilinear_sample(img, np.array([-5.0, 3.5, 1.5]), np.array([1.0, 1.0, 1.5]))
    np.testing.assert_allclose(out, [0.0, 0.5, 1.0])


@needs_c
def test_analysis_rows_backends_agree(rng):
    x = rng.normal(size=(5, 32))
    h0 = rng.normal(size=16)
    h1 = rng.normal(size=16)
    for a, b in zip(kernels.analysis_rows(x, h0, h1, _ckernels),
                    kernels.analysis_rows(x, h0, h1, _pykernels)):
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13)


def test_pure_python_switch():
    env = dict(os.environ, FACEPROBE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import faceprobe; print(faceprobe.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_backend_name_is_known():
    assert kernels.BACKEND in ("cython", "python")
