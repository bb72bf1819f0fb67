"""Pure numpy implementations of the hot kernels.

These are the fallback used when the compiled extension is unavailable
(or when RETIME_KERNELS=pure).  Arithmetic is kept in exactly the same
order as the compiled versions so both backends produce bit-identical
float64 output.
"""

from __future__ import annotations

import numpy as np


def eq1_indices(n: int, l: int, alpha: float) -> np.ndarray:
    """1-based source indices floor(alpha*i) for i=1..l, clamped to [1, n]."""
    x = np.floor(alpha * np.arange(1, l + 1, dtype=np.float64))
    return np.clip(x, 1.0, float(n)).astype(np.int64)


def linear_resample(frames: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """Blend rows of `frames` (N, P) at fractional 1-based `positions` (M,).

    Position t maps to (1-w) * frames[floor(t)] + w * frames[floor(t)+1]
    with w = t - floor(t); t is clamped to [1, N] and t = N returns the
    last row exactly.
    """
    n = frames.shape[0]
    t = np.clip(positions, 1.0, float(n))
    f = np.floor(t)
    w = t - f
    lo = f.astype(np.int64)
    at_end = lo >= n
    hi = np.where(at_end, n, lo + 1)
    w = np.where(at_end, 0.0, w)
    a = frames[lo - 1]
    b = frames[hi - 1]
    return (1.0 - w)[:, None] * a + w[:, None] * b


def bilinear_resize(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize of one frame (H, W, C) using half-pixel centers."""
    h, w = img.shape[0], img.shape[1]
    scale_y = h / out_h
    scale_x = w / out_w

    sy = np.clip((np.arange(out_h, dtype=np.float64) + 0.5) * scale_y - 0.5, 0.0, h - 1.0)
    sx = np.clip((np.arange(out_w, dtype=np.float64) + 0.5) * scale_x - 0.5, 0.0, w - 1.0)
    y0 = np.floor(sy)
    x0 = np.floor(sx)
    wy = sy - y0
    wx = sx - x0
    y0 = y0.astype(np.int64)
    x0 = x0.astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)

    p00 = img[np.ix_(y0, x0)]
    p01 = img[np.ix_(y0, x1)]
    p10 = img[np.ix_(y1, x0)]
    p11 = img[np.ix_(y1, x1)]
    cwx = wx[None, :, None]
    top = (1.0 - cwx) * p00 + cwx * p01
    bot = (1.0 - cwx) * p10 + cwx * p11
    cwy = wy[:, None, None]
    return (1.0 - cwy) * top + cwy * bot
