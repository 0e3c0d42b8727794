"""Numpy implementations of the inner loops in ``_ckernels.pyx``.

Used when the compiled extension is missing or when ``FACEPROBE_PURE_PYTHON``
is set. Each function has the same signature and semantics as its compiled
twin.
"""

import numpy as np

# (row offset, col offset) per bit, clockwise from the top-left neighbour
LBP_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))


def lbp_codes(img):
    rows, cols = img.shape
    centre = img[1:-1, 1:-1]
    codes = np.zeros((rows - 2, cols - 2), dtype=np.uint8)
    for bit, (dr, dc) in enumerate(LBP_OFFSETS):
        neigh = img[1 + dr:rows - 1 + dr, 1 + dc:cols - 1 + dc]
        codes |= (neigh > centre).astype(np.uint8) << bit
    return codes


def conv2d_same(img, kre, kim, cy, cx):
    rows, cols = img.shape
    kr, kc = kre.shape
    kernel = kre + 1j * kim
    out = np.zeros((rows, cols), dtype=np.complex128)
    # accumulate one shifted copy of the image per kernel tap
    for i in range(kr):
        dr = i - cy
        r0, r1 = max(0, dr), min(rows, rows + dr)
        if r0 >= r1:
            continue
        for j in range(kc):
            dc = j - cx
            c0, c1 = max(0, dc), min(cols, cols + dc)
            if c0 >= c1:
                continue
            out[r0:r1, c0:c1] += kernel[i, j] * img[r0 - dr:r1 - dr, c0 - dc:c1 - dc]
    return out


def bilinear_sample(img, xs, ys):
    rows, cols = img.shape
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    out = np.zeros(xs.shape, dtype=np.float64)
    ok = np.isfinite(xs) & np.isfinite(ys)
    ok &= (xs > -1.0) & (ys > -1.0) & (xs < cols) & (ys < rows)
    x = xs[ok]
    y = ys[ok]
    x0 = np.floor(x).astype(np.intp)
    y0 = np.floor(y).astype(np.intp)
    fx = x - x0
    fy = y - y0

    def pix(r, c):
        inside = (r >= 0) & (r < rows) & (c >= 0) & (c < cols)
        vals = np.zeros(r.shape, dtype=np.float64)
        vals[inside] = img[r[inside], c[inside]]
        return vals

    a = pix(y0, x0)
    b = pix(y0, x0 + 1)
    c = pix(y0 + 1, x0)
    d = pix(y0 + 1, x0 + 1)
    out[ok] = (1.0 - fy) * ((1.0 - fx) * a + fx * b) + fy * ((1.0 - fx) * c + fx * d)
    return out


def analysis_rows(x, h0, h1):
    rows, n = x.shape
    taps = h0.shape[0]
    half = n // 2
    m = np.arange(half)
    lo = np.zeros((rows, half))
    hi = np.zeros((rows, half))
    for j in range(taps):
        cols = x[:, (2 * m + taps - 1 - j) % n]
        lo += h0[j] * cols
        hi += h1[j] * cols
    return lo, hi
