"""Backend selection for the hot inner loops.

The compiled Cython module is preferred. Setting ``FACEPROBE_PURE_PYTHON=1``
forces the numpy fallback, as does a missing or broken build.
"""

import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("FACEPROBE_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python backend requested")
    from . import _ckernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"


def _c64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def lbp_codes(img, impl=None):
    """8-bit LBP code of every interior pixel of a 2-D float image."""
    return (impl or _impl).lbp_codes(_c64(img))


def conv2d_same(img, kernel, center, impl=None):
    """Zero-padded 2-D convolution of a real image with a complex kernel.

    ``center`` is the (row, col) of the kernel origin; the output has the
    image's shape.
    """
    kernel = np.asarray(kernel, dtype=np.complex128)
    cy, cx = center
    return (impl or _impl).conv2d_same(_c64(img), _c64(kernel.real), _c64(kernel.imag), int(cy), int(cx))


def bilinear_sample(img, xs, ys, impl=None):
    """Sample ``img`` at (x=col, y=row) points; reads outside the raster are 0."""
    xs = _c64(xs)
    shape = xs.shape
    out = (impl or _impl).bilinear_sample(_c64(img), xs.ravel(), _c64(ys).ravel())
    return out.reshape(shape)


def analysis_rows(x, h0, h1, impl=None):
    """Periodic two-channel analysis of every row, decimated by two."""
    return (impl or _impl).analysis_rows(_c64(x), _c64(h0), _c64(h1))
