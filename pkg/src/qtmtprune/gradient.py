"""Directional mean-absolute Sobel responses over a block interior.

The response at a pixel is the element-wise product-sum of the 3x3 kernel
with the window centred there (no kernel flip). Only interior positions,
whose windows lie fully inside the block, contribute; a block smaller than
3x3 in either dimension has no interior and no defined gradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frame_io import Region

DIRECTIONS = ("h", "v", "d", "a")

_K_H = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.int32)
_K_V = _K_H.T.copy()
_K_D = np.array([[0, 1, 2], [-1, 0, 1], [-2, -1, 0]], dtype=np.int32)
# 135-degree kernel: the 45-degree kernel rotated a quarter turn, matching
# how a quarter-turn of the image maps one diagonal orientation to the other.
_K_A = np.rot90(_K_D).copy()

KERNELS: dict[str, np.ndarray] = {"h": _K_H, "v": _K_V, "d": _K_D, "a": _K_A}
for _k in KERNELS.values():
    _k.setflags(write=False)


class RegionTooSmallError(ValueError):
    """Block has no 3x3 interior, so directional gradients are undefined."""


@dataclass(frozen=True)
class DirGradients:
    """Mean absolute response per direction."""

    g_h: float
    g_v: float
    g_d: float
    g_a: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.g_h, self.g_v, self.g_d, self.g_a)

    def by_dir(self, direction: str) -> float:
        return getattr(self, f"g_{direction}")


def _abs_response_sum(px: np.ndarray, kernel: np.ndarray) -> int:
    # 9 shifted slices; exact integer arithmetic
    h, w = px.shape
    acc = np.zeros((h - 2, w - 2), dtype=np.int64)
    for i in range(3):
        for j in range(3):
            k = int(kernel[i, j])
            if k:
                acc += k * px[i : i + h - 2, j : j + w - 2].astype(np.int64)
    return int(np.abs(acc).sum())


def directional_gradient(region: Region, direction: str) -> float:
    """Mean |response| of one directional kernel over the block interior."""
    if direction not in KERNELS:
        raise ValueError(f"unknown gradient direction {direction!r}")
    if region.w < 3 or region.h < 3:
        raise RegionTooSmallError(
            f"{region.w}x{region.h} block has no 3x3 interior"
        )
    px = region.pixels()
    count = (region.w - 2) * (region.h - 2)
    return _abs_response_sum(px, KERNELS[direction]) / count


def all_gradients(region: Region) -> DirGradients:
    """All four directional gradients of a block."""
    if region.w < 3 or region.h < 3:
        raise RegionTooSmallError(
            f"{region.w}x{region.h} block has no 3x3 interior"
        )
    px = region.pixels()
    count = (region.w - 2) * (region.h - 2)
    return DirGradients(
        g_h=_abs_response_sum(px, _K_H) / count,
        g_v=_abs_response_sum(px, _K_V) / count,
        g_d=_abs_response_sum(px, _K_D) / count,
        g_a=_abs_response_sum(px, _K_A) / count,
    )
