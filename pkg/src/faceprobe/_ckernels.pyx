# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Semantics mirror faceprobe._pykernels exactly."""

import numpy as np

from libc.math cimport floor, isfinite


def lbp_codes(const double[:, ::1] img):
    cdef Py_ssize_t rows = img.shape[0]
    cdef Py_ssize_t cols = img.shape[1]
    out = np.zeros((rows - 2, cols - 2), dtype=np.uint8)
    cdef unsigned char[:, ::1] o = out
    cdef Py_ssize_t r, c
    cdef double g
    cdef unsigned char code
    with nogil:
        for r in range(1, rows - 1):
            for c in range(1, cols - 1):
                g = img[r, c]
                code = 0
                # clockwise from the top-left neighbour
                if img[r - 1, c - 1] > g:
                    code |= 1
                if img[r - 1, c] > g:
                    code |= 2
                if img[r - 1, c + 1] > g:
                    code |= 4
                if img[r, c + 1] > g:
                    code |= 8
                if img[r + 1, c + 1] > g:
                    code |= 16
                if img[r + 1, c] > g:
                    code |= 32
                if img[r + 1, c - 1] > g:
                    code |= 64
                if img[r, c - 1] > g:
                    code |= 128
                o[r - 1, c - 1] = code
    return out


def conv2d_same(const double[:, ::1] img, const double[:, ::1] kre,
                const double[:, ::1] kim, Py_ssize_t cy, Py_ssize_t cx):
    cdef Py_ssize_t rows = img.shape[0]
    cdef Py_ssize_t cols = img.shape[1]
    cdef Py_ssize_t kr = kre.shape[0]
    cdef Py_ssize_t kc = kre.shape[1]
    out_re = np.zeros((rows, cols), dtype=np.float64)
    out_im = np.zeros((rows, cols), dtype=np.float64)
    cdef double[:, ::1] ore = out_re
    cdef double[:, ::1] oim = out_im
    cdef Py_ssize_t r, c, i, j, sr, sc, i0, i1, j0, j1
    cdef double acc_re, acc_im, v
    with nogil:
        for r in range(rows):
            # taps i with 0 <= r - i + cy < rows
            i0 = r + cy - rows + 1
            if i0 < 0:
                i0 = 0
            i1 = r + cy + 1
            if i1 > kr:
                i1 = kr
            for c in range(cols):
                j0 = c + cx - cols + 1
                if j0 < 0:
                    j0 = 0
                j1 = c + cx + 1
                if j1 > kc:
                    j1 = kc
                acc_re = 0.0
                acc_im = 0.0
                for i in range(i0, i1):
                    sr = r - i + cy
                    for j in range(j0, j1):
                        sc = c - j + cx
                        v = img[sr, sc]
                        acc_re = acc_re + kre[i, j] * v
                        acc_im = acc_im + kim[i, j] * v
                ore[r, c] = acc_re
                oim[r, c] = acc_im
    return out_re + 1j * out_im


cdef inline double _pix(const double[:, ::1] img, Py_ssize_t r, Py_ssize_t c,
                        Py_ssize_t rows, Py_ssize_t cols) noexcept nogil:
    if r < 0 or r >= rows or c < 0 or c >= cols:
        return 0.0
    return img[r, c]


def bilinear_sample(const double[:, ::1] img, const double[::1] xs, const double[::1] ys):
    cdef Py_ssize_t rows = img.shape[0]
    cdef Py_ssize_t cols = img.shape[1]
    cdef Py_ssize_t n = xs.shape[0]
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t k, x0, y0
    cdef double x, y, fx, fy, a, b, cc, d
    with nogil:
        for k in range(n):
            x = xs[k]
            y = ys[k]
            if not (isfinite(x) and isfinite(y)):
                continue
            if x <= -1.0 or y <= -1.0 or x >= cols or y >= rows:
                continue
            x0 = <Py_ssize_t>floor(x)
            y0 = <Py_ssize_t>floor(y)
            fx = x - x0
            fy = y - y0
            a = _pix(img, y0, x0, rows, cols)
            b = _pix(img, y0, x0 + 1, rows, cols)
            cc = _pix(img, y0 + 1, x0, rows, cols)
            d = _pix(img, y0 + 1, x0 + 1, rows, cols)
            o[k] = (1.0 - fy) * ((1.0 - fx) * a + fx * b) + fy * ((1.0 - fx) * cc + fx * d)
    return out


def analysis_rows(const double[:, ::1] x, const double[::1] h0, const double[::1] h1):
    cdef Py_ssize_t rows = x.shape[0]
    cdef Py_ssize_t n = x.shape[1]
    cdef Py_ssize_t taps = h0.shape[0]
    cdef Py_ssize_t half = n // 2
    lo = np.zeros((rows, half), dtype=np.float64)
    hi = np.zeros((rows, half), dtype=np.float64)
    cdef double[:, ::1] lo_v = lo
    cdef double[:, ::1] hi_v = hi
    cdef Py_ssize_t r, m, j, idx
    cdef double acc_lo, acc_hi, v
    with nogil:
        for r in range(rows):
            for m in range(half):
                acc_lo = 0.0
                acc_hi = 0.0
                for j in range(taps):
                    idx = (2 * m + taps - 1 - j) % n
                    v = x[r, idx]
                    acc_lo = acc_lo + h0[j] * v
                    acc_hi = acc_hi + h1[j] * v
                lo_v[r, m] = acc_lo
                hi_v[r, m] = acc_hi
    return lo, hi
