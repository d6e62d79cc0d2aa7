"""Backend dispatch for the hot kernels.

The compiled extension is used when present; `QTMTPRUNE_PURE_PY=1` forces the
pure-numpy fallback. Both backends are exact integer arithmetic and return
bit-identical results, so the choice affects speed only.
"""

from __future__ import annotations

import os

import numpy as np

if os.environ.get("QTMTPRUNE_PURE_PY", "") not in ("", "0"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND: str = _impl.BACKEND_NAME


def sobel_abs_maps(plane_data: np.ndarray) -> np.ndarray:
    """int32[4, H-2, W-2] absolute directional responses, order (h, v, d, a)."""
    return _impl.sobel_abs_maps(np.ascontiguousarray(plane_data, dtype=np.uint8))


def pred_sse_batch(plane_data, xs, ys, ws, hs) -> np.ndarray:
    """int64[n, 4] per-block predictor SSEs, order (DC, H, V, planar)."""
    return _impl.pred_sse_batch(
        np.ascontiguousarray(plane_data, dtype=np.uint8),
        np.ascontiguousarray(xs, dtype=np.int64),
        np.ascontiguousarray(ys, dtype=np.int64),
        np.ascontiguousarray(ws, dtype=np.int64),
        np.ascontiguousarray(hs, dtype=np.int64),
    )
