"""Cross-block difference measures and split-skip decisions.

A binary or ternary split direction is skipped when the sub-blocks it would
produce look alike (similar directional gradients) or when the content
difference between the two halves of the *other* direction dominates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .frame_io import Region, SplitMode, split_region
from .gradient import DIRECTIONS, DirGradients, all_gradients, directional_gradient


@dataclass(frozen=True)
class Thresholds:
    """Decision thresholds: t1 gradient-ratio, t2 content-ratio, t3 ternary."""

    t1: float
    t2: float
    t3: float

    def __post_init__(self):
        for name, v in (("t1", self.t1), ("t2", self.t2), ("t3", self.t3)):
            if not v > 1.0:
                raise ValueError(f"threshold {name} must be > 1, got {v}")


# Tuned operating points for two encoder generations; "vtm9" is the default.
PRESETS: dict[str, Thresholds] = {
    "vtm5": Thresholds(t1=1.165, t2=3.500, t3=2.000),
    "vtm9": Thresholds(t1=1.180, t2=3.500, t3=2.000),
}


@dataclass(frozen=True)
class DiffFlags:
    """Intermediate binary-split flags: gradient-similarity per axis (dg_*)
    and dominant-content-difference per axis (dc_*)."""

    dg_bh: int
    dg_bv: int
    dc_bh: int
    dc_bv: int


@dataclass(frozen=True)
class SkipSet:
    """Skip decisions for the four directional split modes."""

    skip_bh: int
    skip_bv: int
    skip_th: int
    skip_tv: int

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.skip_bh, self.skip_bv, self.skip_th, self.skip_tv)


def ratio_m(p1: float, p2: float) -> float:
    """Symmetric ratio max/min, always >= 1. Both zero -> 1.0; exactly one
    zero -> +inf; negative input is rejected."""
    if p1 < 0 or p2 < 0:
        raise ValueError(f"ratio inputs must be non-negative, got ({p1}, {p2})")
    hi, lo = (p1, p2) if p1 >= p2 else (p2, p1)
    if lo == 0.0:
        return 1.0 if hi == 0.0 else math.inf
    return hi / lo


def content_diff(b1: Region, b2: Region) -> float:
    """Mean over b1's pixels of (pixel - mean(b2))^2. Asymmetric in (b1, b2)."""
    p1 = b1.pixels()
    p2 = b2.pixels()
    s1 = int(p1.sum(dtype=np.int64))
    q1 = int((p1.astype(np.int64) ** 2).sum(dtype=np.int64))
    n1 = b1.area
    mu2 = int(p2.sum(dtype=np.int64)) / b2.area
    # expanded form of mean((b1 - mu2)^2); kept in this exact operation order
    # so the batched engine reproduces it bit for bit
    return q1 / n1 - 2.0 * mu2 * (s1 / n1) + mu2 * mu2


def bt_gradient_flag(g1: DirGradients, g2: DirGradients, t1: float) -> int:
    """0 when the two sub-blocks' gradients agree in all four directions
    (every max/min ratio strictly below t1), else 1."""
    for direction in DIRECTIONS:
        if not ratio_m(g1.by_dir(direction), g2.by_dir(direction)) < t1:
            return 1
    return 0


def bt_content_flags(
    bh1: Region, bh2: Region, bv1: Region, bv2: Region, t2: float
) -> tuple[int, int]:
    """Dominant-content-difference flags (dc_bh, dc_bv) from the horizontal
    halves (bh1, bh2) and vertical halves (bv1, bv2). At most one flag is 1."""
    mh = ratio_m(content_diff(bh1, bh2), content_diff(bh2, bh1))
    mv = ratio_m(content_diff(bv1, bv2), content_diff(bv2, bv1))
    dc_bh = 1 if (mv / mh < 1.0 and mh > t2) else 0
    dc_bv = 1 if (mh / mv < 1.0 and mv > t2) else 0
    return dc_bh, dc_bv


def combine_bt_flags(flags: DiffFlags) -> tuple[int, int]:
    """Fold the four intermediate flags into (skip_bh, skip_bv).

    A direction is skipped when its halves' gradients agree, or else when the
    content difference across the other direction dominates.
    """
    if flags.dg_bh == 0:
        skip_bh = 1
    else:
        skip_bh = 1 if flags.dc_bv == 1 else 0
    if flags.dg_bv == 0:
        skip_bv = 1
    else:
        skip_bv = 1 if flags.dc_bh == 1 else 0
    return skip_bh, skip_bv


def bt_flags(parent: Region, t: Thresholds) -> DiffFlags | None:
    """Intermediate flags for the binary-split decision, or None when the
    parent cannot be halved both ways into blocks with a 3x3 interior."""
    if parent.w % 2 or parent.h % 2:
        raise ValueError(
            f"binary-split flags need even dimensions, got {parent.w}x{parent.h}"
        )
    bh1, bh2 = split_region(parent, SplitMode.BHS)
    bv1, bv2 = split_region(parent, SplitMode.BVS)
    if min(parent.w, parent.h) < 6:
        # some half is thinner than 3 pixels: gradients unavailable
        return None
    dg_bh = bt_gradient_flag(all_gradients(bh1), all_gradients(bh2), t.t1)
    dg_bv = bt_gradient_flag(all_gradients(bv1), all_gradients(bv2), t.t1)
    dc_bh, dc_bv = bt_content_flags(bh1, bh2, bv1, bv2, t.t2)
    return DiffFlags(dg_bh=dg_bh, dg_bv=dg_bv, dc_bh=dc_bh, dc_bv=dc_bv)


def bt_skip(parent: Region, t: Thresholds) -> tuple[int, int]:
    """(skip_bh, skip_bv) for a parent block that can be halved both ways.

    Returns (0, 0) — never skip — when any half lacks a 3x3 interior.
    """
    flags = bt_flags(parent, t)
    if flags is None:
        return (0, 0)
    return combine_bt_flags(flags)


def _tt_axis_skip(parts: list[Region], direction: str, t3: float) -> int:
    """1 when all three pairwise gradient ratios along `direction` are
    strictly below t3; 0 otherwise or when any part lacks a 3x3 interior."""
    if any(p.w < 3 or p.h < 3 for p in parts):
        return 0
    g = [directional_gradient(p, direction) for p in parts]
    for i in range(3):
        for j in range(i + 1, 3):
            if not ratio_m(g[i], g[j]) < t3:
                return 0
    return 1


def tt_skip(parent: Region, t: Thresholds) -> tuple[int, int]:
    """(skip_th, skip_tv) for a parent block divisible by 4 both ways.

    The horizontal ternary split is skipped when the three bands have alike
    vertical gradients; the vertical one when the three columns have alike
    horizontal gradients.
    """
    if parent.h % 4 or parent.w % 4:
        raise ValueError(
            f"ternary-split flags need dimensions divisible by 4, got {parent.w}x{parent.h}"
        )
    th_parts = split_region(parent, SplitMode.THS)
    tv_parts = split_region(parent, SplitMode.TVS)
    skip_th = _tt_axis_skip(th_parts, "v", t.t3)
    skip_tv = _tt_axis_skip(tv_parts, "h", t.t3)
    return skip_th, skip_tv


def all_skip_flags(parent: Region, t: Thresholds) -> SkipSet:
    """Full skip set for a block on which all four directional splits are
    geometrically possible."""
    skip_bh, skip_bv = bt_skip(parent, t)
    skip_th, skip_tv = tt_skip(parent, t)
    return SkipSet(skip_bh=skip_bh, skip_bv=skip_bv, skip_th=skip_th, skip_tv=skip_tv)
