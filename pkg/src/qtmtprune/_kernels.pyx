# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: directional Sobel response maps and batched
per-block intra-predictor SSE. Bit-identical to `_kernels_py`."""

import numpy as np

cimport numpy as cnp

BACKEND_NAME = "compiled"


def sobel_abs_maps(const unsigned char[:, ::1] arr):
    """Absolute directional responses at every 3x3 window; int32[4, H-2, W-2]
    in direction order (h, v, d, a)."""
    cdef Py_ssize_t H = arr.shape[0]
    cdef Py_ssize_t W = arr.shape[1]
    cdef Py_ssize_t mh = H - 2 if H > 2 else 0
    cdef Py_ssize_t mw = W - 2 if W > 2 else 0
    out_np = np.empty((4, mh, mw), dtype=np.int32)
    if mh == 0 or mw == 0:
        return out_np
    cdef cnp.int32_t[:, :, ::1] out = out_np
    cdef Py_ssize_t i, j
    cdef int p00, p01, p02, p10, p12, p20, p21, p22
    cdef int gh, gv, gd, ga
    with nogil:
        for i in range(mh):
            for j in range(mw):
                p00 = arr[i, j]
                p01 = arr[i, j + 1]
                p02 = arr[i, j + 2]
                p10 = arr[i + 1, j]
                p12 = arr[i + 1, j + 2]
                p20 = arr[i + 2, j]
                p21 = arr[i + 2, j + 1]
                p22 = arr[i + 2, j + 2]
                gh = (p02 - p00) + 2 * (p12 - p10) + (p22 - p20)
                gv = (p20 - p00) + 2 * (p21 - p01) + (p22 - p02)
                gd = p01 + 2 * p02 - p10 + p12 - 2 * p20 - p21
                ga = 2 * p00 + p01 + p10 - p12 - p21 - 2 * p22
                out[0, i, j] = gh if gh >= 0 else -gh
                out[1, i, j] = gv if gv >= 0 else -gv
                out[2, i, j] = gd if gd >= 0 else -gd
                out[3, i, j] = ga if ga >= 0 else -ga
    return out_np


def pred_sse_batch(const unsigned char[:, ::1] arr,
                   const long long[::1] xs,
                   const long long[::1] ys,
                   const long long[::1] ws,
                   const long long[::1] hs):
    """Per-block SSE of the four intra predictors (DC, horizontal-copy,
    vertical-copy, planar); int64[n, 4]. See `_kernels_py.pred_sse_batch`
    for the exact integer definitions reproduced here."""
    cdef Py_ssize_t n = xs.shape[0]
    out_np = np.empty((n, 4), dtype=np.int64)
    cdef long long[:, ::1] out = out_np
    cdef Py_ssize_t maxw = 0, maxh = 0, k
    for k in range(n):
        if ws[k] > maxw:
            maxw = ws[k]
        if hs[k] > maxh:
            maxh = hs[k]
    top_np = np.empty(max(maxw, 1), dtype=np.int64)
    left_np = np.empty(max(maxh, 1), dtype=np.int64)
    cdef long long[::1] top = top_np
    cdef long long[::1] left = left_np
    cdef long long x, y, w, h, s, dc, tr, bl, num, pred, d, px
    cdef long long sse_dc, sse_h, sse_v, sse_pl
    cdef Py_ssize_t i, j
    with nogil:
        for k in range(n):
            x = xs[k]; y = ys[k]; w = ws[k]; h = hs[k]
            if y >= 1:
                for j in range(w):
                    top[j] = arr[y - 1, x + j]
            else:
                for j in range(w):
                    top[j] = 128
            if x >= 1:
                for i in range(h):
                    left[i] = arr[y + i, x - 1]
            else:
                for i in range(h):
                    left[i] = 128
            s = 0
            for j in range(w):
                s += top[j]
            for i in range(h):
                s += left[i]
            dc = (s + (w + h) / 2) / (w + h)
            tr = top[w - 1]
            bl = left[h - 1]
            sse_dc = 0
            sse_h = 0
            sse_v = 0
            sse_pl = 0
            for i in range(h):
                for j in range(w):
                    px = arr[y + i, x + j]
                    d = px - dc
                    sse_dc += d * d
                    d = px - left[i]
                    sse_h += d * d
                    d = px - top[j]
                    sse_v += d * d
                    num = ((w - 1 - j) * left[i] + (j + 1) * tr) * h \
                        + ((h - 1 - i) * top[j] + (i + 1) * bl) * w + w * h
                    pred = num / (2 * w * h)
                    d = px - pred
                    sse_pl += d * d
            out[k, 0] = sse_dc
            out[k, 1] = sse_h
            out[k, 2] = sse_v
            out[k, 3] = sse_pl
    return out_np
