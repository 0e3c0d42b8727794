import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from faceprobe.errors import DataError
from faceprobe.lbp import block_edges, code_histograms, lbp_block_histograms, lbp_code, lbp_image


def naive_lbp(img):
    """Per-pixel oracle: threshold the 8 neighbours clockwise from top-left."""
    rows, cols = img.shape
    out = np.zeros((rows - 2, cols - 2), dtype=np.int64)
    ring = [(-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1)]
    for r in range(1, rows - 1):
        for c in range(1, cols - 1):
            code = 0
            for bit, (dr, dc) in enumerate(ring):
                if img[r + dr, c + dc] - img[r, c] > 0:
                    code += 2**bit
            out[r - 1, c - 1] = code
    return out


def test_single_patch_bits():
    patch = np.array([[9, 0, 9], [0, 5, 9], [9, 5, 0]])
    # set: TL(1), TR(4), R(8), BL(64); B equals centre so stays clear
    assert lbp_code(patch) == 1 + 4 + 8 + 64


def test_equal_neighbours_give_zero():
    assert lbp_code(np.full((3, 3), 7.0)) == 0
    assert lbp_code([[8, 8, 8], [8, 7, 8], [8, 8, 8]]) == 255


def test_matches_oracle_on_random_images(rng):
    for _ in range(20):
        img = rng.integers(0, 6, size=(rng.integers(3, 15), rng.integers(3, 15))).astype(float)
        np.testing.assert_array_equal(lbp_image(img), naive_lbp(img))


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(3, 10), st.integers(3, 10)),
              elements=st.floats(0, 255, allow_nan=False)))
def test_matches_oracle_property(img):
    np.testing.assert_array_equal(lbp_image(img), naive_lbp(img))


def test_block_edges_remainder_in_last_block():
    np.testing.assert_array_equal(block_edges(63, 9), [0, 7, 14, 21, 28, 35, 42, 49, 56, 63])
    np.testing.assert_array_equal(block_edges(58, 9), [0, 6, 12, 18, 24, 30, 36, 42, 48, 58])


def test_histograms_count_interior_pixels(rng):
    img = rng.uniform(0, 255, size=(65, 60))
    fv = lbp_block_histograms(img)
    assert fv.dims == 81 * 256
    hist = fv.values.reshape(81, 256)
    assert hist.sum() == 63 * 58
    # first block covers a 7x6 patch of codes
    assert hist[0].sum() == 7 * 6


def test_histogram_block_order():
    codes = np.zeros((4, 6), dtype=np.uint8)
    codes[:2, 3:] = 5  # top-right block of a 2x2 grid
    hist = code_histograms(codes, 2, 2).reshape(4, 256)
    assert hist[1, 5] == 6 and hist[0, 0] == 6 and hist[2, 0] == 6 and hist[3, 0] == 6


def test_errors():
    with pytest.raises(DataError):
        lbp_image(np.zeros((2, 5)))
    with pytest.raises(DataError):
        code_histograms(np.zeros((4, 4), dtype=np.uint8), 5, 1)
    with pytest.raises(DataError):
        lbp_code([1, 2, 3])
