"""Compiled vs numpy-fallback timings of the inner kernels.

    python benchmarks/bench_kernels.py [--repeat N]

Both backends run on the same inputs; outputs are checked for agreement
before timing.
"""

import argparse
import timeit

import numpy as np

from faceprobe import _pykernels, kernels
from faceprobe.gabor import build_gabor_bank
from faceprobe.wavelet import daubechies8_filters


def cases(rng):
    face = rng.uniform(0, 255, size=(65, 60))
    bank = build_gabor_bank()
    kernel = bank.flat_kernels()[0]
    xs = rng.uniform(-2, 62, size=60 * 60)
    ys = rng.uniform(-2, 67, size=60 * 60)
    db8 = daubechies8_filters()
    wide = rng.normal(size=(128, 128))
    return {
        "lbp_codes 65x60": lambda impl: kernels.lbp_codes(face, impl),
        "conv2d_same 65x60 * 32x32": lambda impl: kernels.conv2d_same(face, kernel, bank.center, impl),
        "bilinear_sample 3600 pts": lambda impl: kernels.bilinear_sample(face, xs, ys, impl),
        "analysis_rows 128x128 db8": lambda impl: kernels.analysis_rows(wide, db8.lowpass, db8.highpass, impl),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5, help="best-of repeats per case")
    args = ap.parse_args(argv)

    if kernels.BACKEND != "cython":
        print("compiled extension not available; only the fallback can be timed")
        return 1
    compiled = kernels._impl
    rng = np.random.default_rng(0)
    print(f"{'kernel':<28} {'compiled ms':>12} {'fallback ms':>12} {'speed-up':>9}")
    for name, fn in cases(rng).items():
        a, b = fn(compiled), fn(_pykernels)
        if not np.allclose(a, b, rtol=1e-12, atol=1e-9):
            raise SystemExit(f"{name}: backends disagree")
        times = []
        for impl in (compiled, _pykernels):
            timer = timeit.Timer(lambda: fn(impl))
            n, _ = timer.autorange()
            times.append(min(timer.repeat(args.repeat, n)) / n * 1e3)
        print(f"{name:<28} {times[0]:12.3f} {times[1]:12.3f} {times[1] / times[0]:8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
