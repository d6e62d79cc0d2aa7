"""Pure-numpy implementations of the hot kernels.

Same integer semantics as the compiled extension (`_kernels.pyx`): every
intermediate is exact integer arithmetic, so both backends return
bit-identical arrays.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def sobel_abs_maps(arr: np.ndarray) -> np.ndarray:
    """Absolute directional responses at every 3x3 window of a plane.

    Returns int32[4, H-2, W-2] in direction order (h, v, d, a); map[k, i, j]
    is the |response| of the window whose top-left pixel is (i, j).
    """
    a = arr.astype(np.int32)
    H, W = a.shape
    mh, mw = max(0, H - 2), max(0, W - 2)
    out = np.empty((4, mh, mw), dtype=np.int32)
    if mh == 0 or mw == 0:
        return out
    c = {(i, j): a[i : i + mh, j : j + mw] for i in range(3) for j in range(3)}
    gh = (c[0, 2] - c[0, 0]) + 2 * (c[1, 2] - c[1, 0]) + (c[2, 2] - c[2, 0])
    gv = (c[2, 0] - c[0, 0]) + 2 * (c[2, 1] - c[0, 1]) + (c[2, 2] - c[0, 2])
    gd = c[0, 1] + 2 * c[0, 2] - c[1, 0] + c[1, 2] - 2 * c[2, 0] - c[2, 1]
    ga = 2 * c[0, 0] + c[0, 1] + c[1, 0] - c[1, 2] - c[2, 1] - 2 * c[2, 2]
    np.abs(gh, out=out[0])
    np.abs(gv, out=out[1])
    np.abs(gd, out=out[2])
    np.abs(ga, out=out[3])
    return out


def pred_sse_batch(
    arr: np.ndarray,
    xs: np.ndarray,
    ys: np.ndarray,
    ws: np.ndarray,
    hs: np.ndarray,
) -> np.ndarray:
    """Per-block SSE of the four intra predictors.

    Returns int64[n, 4] in predictor order (DC, horizontal-copy,
    vertical-copy, planar). Reference neighbors are the row above and column
    left of the block; positions outside the plane read as 128.

    Integer predictor definitions (n = w + h, all divisions floor):
      DC    = (sum(top) + sum(left) + n // 2) // n
      H     -> pred[i, j] = left[i]
      V     -> pred[i, j] = top[j]
      planar-> pred[i, j] = (h*((w-1-j)*left[i] + (j+1)*top[w-1])
                             + w*((h-1-i)*top[j] + (i+1)*left[h-1])
                             + w*h) // (2*w*h)
    """
    n = len(xs)
    out = np.empty((n, 4), dtype=np.int64)
    for k in range(n):
        x, y, w, h = int(xs[k]), int(ys[k]), int(ws[k]), int(hs[k])
        blk = arr[y : y + h, x : x + w].astype(np.int64)
        if y >= 1:
            top = arr[y - 1, x : x + w].astype(np.int64)
        else:
            top = np.full(w, 128, dtype=np.int64)
        if x >= 1:
            left = arr[y : y + h, x - 1].astype(np.int64)
        else:
            left = np.full(h, 128, dtype=np.int64)
        s = int(top.sum()) + int(left.sum())
        dc = (s + (w + h) // 2) // (w + h)
        out[k, 0] = ((blk - dc) ** 2).sum()
        out[k, 1] = ((blk - left[:, None]) ** 2).sum()
        out[k, 2] = ((blk - top[None, :]) ** 2).sum()
        tr = int(top[w - 1])
        bl = int(left[h - 1])
        jj = np.arange(w, dtype=np.int64)
        ii = np.arange(h, dtype=np.int64)
        ph = (w - 1 - jj)[None, :] * left[:, None] + (jj + 1)[None, :] * tr
        pv = (h - 1 - ii)[:, None] * top[None, :] + (ii + 1)[:, None] * bl
        pred = (ph * h + pv * w + w * h) // (2 * w * h)
        out[k, 3] = ((blk - pred) ** 2).sum()
    return out
