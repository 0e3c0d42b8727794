"""3x3 local binary patterns and block-wise code histograms."""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import DataError
from .features import FeatureVector, Source

DEFAULT_BLOCKS = (9, 9)


def lbp_code(patch) -> int:
    """Code of a single 3x3 patch.

    Bit i is set when neighbour i is strictly brighter than the centre;
    neighbours are numbered clockwise starting at the top-left.
    """
    p = np.asarray(patch, dtype=np.float64)
    if p.size != 9:
        raise DataError(f"an LBP patch has 9 values, got {p.size}")
    p = p.reshape(3, 3)
    g = p[1, 1]
    ring = (p[0, 0], p[0, 1], p[0, 2], p[1, 2], p[2, 2], p[2, 1], p[2, 0], p[1, 0])
    return sum(1 << i for i, v in enumerate(ring) if v - g > 0)


def lbp_image(img) -> np.ndarray:
    """uint8 code grid over the interior pixels, shape (rows-2, cols-2)."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 3 or img.shape[1] < 3:
        raise DataError(f"LBP needs an image of at least 3x3, got {img.shape}")
    return kernels.lbp_codes(img)


def block_edges(n: int, blocks: int) -> np.ndarray:
    # integer split; the last block absorbs the remainder
    size = n // blocks
    edges = np.arange(blocks + 1) * size
    edges[-1] = n
    return edges


def code_histograms(codes: np.ndarray, blocks_rows: int, blocks_cols: int) -> np.ndarray:
    rows, cols = codes.shape
    if blocks_rows < 1 or blocks_cols < 1:
        raise DataError("block counts must be >= 1")
    if blocks_rows > rows or blocks_cols > cols:
        raise DataError(
            f"{blocks_rows}x{blocks_cols} blocks do not fit a {rows}x{cols} code image"
        )
    re = block_edges(rows, blocks_rows)
    ce = block_edges(cols, blocks_cols)
    # block id per pixel, then one bincount over (block, code) pairs
    row_block = np.repeat(np.arange(blocks_rows), np.diff(re))
    col_block = np.repeat(np.arange(blocks_cols), np.diff(ce))
    block_id = row_block[:, None] * blocks_cols + col_block[None, :]
    flat = block_id.ravel() * 256 + codes.ravel().astype(np.intp)
    return np.bincount(flat, minlength=blocks_rows * blocks_cols * 256).astype(np.float64)


def lbp_block_histograms(img, blocks_rows: int = DEFAULT_BLOCKS[0],
                         blocks_cols: int = DEFAULT_BLOCKS[1]) -> FeatureVector:
    """Concatenated raw-count 256-bin histograms, block-row-major."""
    codes = lbp_image(img)
    return FeatureVector(code_histograms(codes, blocks_rows, blocks_cols), Source.LBP)
