"""Recursive QTMT partition search under a simple intra cost model.

The search runs in two variants: baseline (every legal mode evaluated) and
fast (binary/ternary directions dropped when the cross-block skip flags fire).
Identical sub-blocks reached through different split sequences share one
memoized evaluation, so node counts mean distinct evaluated states.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field

import numpy as np

from .cross_diff import PRESETS, Thresholds, _tt_axis_skip, bt_skip
from .frame_io import Region, SplitMode, split_region
from . import kernels


def lambda_from_qp(qp: int) -> float:
    """HEVC-style Lagrange multiplier so QP sweeps shift the split balance."""
    return 0.57 * 2.0 ** ((qp - 12) / 3.0)


@dataclass(frozen=True)
class SearchConfig:
    ctu_size: int = 64
    min_cu: int = 4
    max_mtt_depth: int = 3
    min_tt_size: int = 16
    qp: int = 32
    lam: float | None = None  # derived from qp when not given
    thresholds: Thresholds = PRESETS["vtm9"]
    fast_enabled: bool = False

    def __post_init__(self):
        if self.ctu_size < 1 or self.ctu_size & (self.ctu_size - 1):
            raise ValueError(f"ctu_size must be a power of two, got {self.ctu_size}")
        if self.min_cu < 1:
            raise ValueError(f"min_cu must be positive, got {self.min_cu}")
        if self.ctu_size < self.min_cu:
            raise ValueError("ctu_size must be at least min_cu")
        if self.min_tt_size < 2 * self.min_cu:
            raise ValueError("min_tt_size must be at least 2*min_cu")
        if not 0 <= self.qp <= 63:
            raise ValueError(f"qp must be in [0, 63], got {self.qp}")
        if self.max_mtt_depth < 0:
            raise ValueError("max_mtt_depth must be non-negative")
        if self.lam is None:
            object.__setattr__(self, "lam", lambda_from_qp(self.qp))
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")


@dataclass(frozen=True)
class PartitionNode:
    region: Region
    chosen: SplitMode
    cost: float
    children: tuple["PartitionNode", ...]
    evaluated_modes: frozenset[SplitMode]
    skipped_modes: frozenset[SplitMode]


@dataclass(frozen=True)
class SearchStats:
    nodes_visited: int
    leaf_count: int
    total_cost: float
    modes_skipped_by_flag: int
    wall_time: float
    fingerprint: str  # hash of input + config (minus fast_enabled)


def legal_modes(region: Region, mtt_depth: int, cfg: SearchConfig) -> set[SplitMode]:
    """Modes allowed at a node: the quad split only at the top of the tree
    (before any binary/ternary split), directional splits while the parts
    stay at or above min_cu and the multi-type depth budget remains."""
    return legal_modes_wh(region.w, region.h, mtt_depth, cfg)


def legal_modes_wh(w: int, h: int, mtt_depth: int, cfg: SearchConfig) -> set[SplitMode]:
    """legal_modes on bare block dimensions (no plane needed)."""
    modes = {SplitMode.NOS}
    if w == h and w > cfg.min_cu and mtt_depth == 0 and w % 2 == 0:
        modes.add(SplitMode.QTS)
    if mtt_depth < cfg.max_mtt_depth:
        if h % 2 == 0 and h // 2 >= cfg.min_cu:
            modes.add(SplitMode.BHS)
        if w % 2 == 0 and w // 2 >= cfg.min_cu:
            modes.add(SplitMode.BVS)
        if h >= cfg.min_tt_size and h % 4 == 0 and h // 4 >= cfg.min_cu:
            modes.add(SplitMode.THS)
        if w >= cfg.min_tt_size and w % 4 == 0 and w // 4 >= cfg.min_cu:
            modes.add(SplitMode.TVS)
    return modes


def bit_proxy(w: int, h: int) -> float:
    """Affine stand-in for coded bits of a leaf block."""
    return 32.0 + (w * h) / 16.0


SPLIT_BIT_PROXY = 2.0


def intra_cost(region: Region, cfg: SearchConfig) -> float:
    """Best-of-four-predictors SSE plus lambda-weighted bit proxy."""
    sse = kernels.pred_sse_batch(
        region.plane.data,
        np.array([region.x]), np.array([region.y]),
        np.array([region.w]), np.array([region.h]),
    )
    return float(sse[0].min()) + cfg.lam * bit_proxy(region.w, region.h)


def input_fingerprint(region: Region, mtt_depth: int, cfg: SearchConfig) -> str:
    """Hash of the searched pixels and the fast-independent config fields."""
    hsh = hashlib.sha1()
    hsh.update(region.plane.data.tobytes())
    hsh.update(
        f"|{region.plane.width}x{region.plane.height}"
        f"|{region.x},{region.y},{region.w},{region.h},{mtt_depth}"
        f"|{cfg.ctu_size},{cfg.min_cu},{cfg.max_mtt_depth},{cfg.min_tt_size}"
        f"|{cfg.qp},{cfg.lam!r}"
        f"|{cfg.thresholds.t1!r},{cfg.thresholds.t2!r},{cfg.thresholds.t3!r}".encode()
    )
    return hsh.hexdigest()


_MTT_ORDER = (SplitMode.QTS, SplitMode.BHS, SplitMode.BVS, SplitMode.THS, SplitMode.TVS)


def search(region: Region, mtt_depth: int, cfg: SearchConfig) -> tuple[PartitionNode, SearchStats]:
    """Depth-first best-cost partition of a block.

    Equal sub-block states (same rectangle and multi-type depth) reached via
    different parents are evaluated once. Skip flags, when enabled, drop a
    directional mode before its children are costed; NOS is always evaluated,
    so every node has a valid outcome.
    """
    t0 = time.perf_counter()
    plane = region.plane
    thr = cfg.thresholds
    memo: dict[tuple[int, int, int, int, int], PartitionNode] = {}
    skipped_total = 0

    def visit(x: int, y: int, w: int, h: int, depth: int) -> PartitionNode:
        nonlocal skipped_total
        key = (x, y, w, h, depth)
        cached = memo.get(key)
        if cached is not None:
            return cached
        r = Region(plane, x, y, w, h)
        legal = legal_modes(r, depth, cfg)
        skip: dict[SplitMode, bool] = {}
        if cfg.fast_enabled:
            if (SplitMode.BHS in legal or SplitMode.BVS in legal) and w % 2 == 0 and h % 2 == 0:
                sbh, sbv = bt_skip(r, thr)
                skip[SplitMode.BHS] = bool(sbh)
                skip[SplitMode.BVS] = bool(sbv)
            if SplitMode.THS in legal:
                skip[SplitMode.THS] = bool(
                    _tt_axis_skip(split_region(r, SplitMode.THS), "v", thr.t3)
                )
            if SplitMode.TVS in legal:
                skip[SplitMode.TVS] = bool(
                    _tt_axis_skip(split_region(r, SplitMode.TVS), "h", thr.t3)
                )
        evaluated = [SplitMode.NOS]
        skipped = set()
        best_mode = SplitMode.NOS
        best_cost = intra_cost(r, cfg)
        best_children: list[PartitionNode] = []
        for mode in _MTT_ORDER:
            if mode not in legal:
                continue
            if skip.get(mode, False):
                skipped.add(mode)
                continue
            child_depth = 0 if mode == SplitMode.QTS else depth + 1
            kids = [
                visit(s.x, s.y, s.w, s.h, child_depth)
                for s in split_region(r, mode)
            ]
            cost = kids[0].cost
            for kid in kids[1:]:
                cost = cost + kid.cost
            cost = cost + cfg.lam * SPLIT_BIT_PROXY
            evaluated.append(mode)
            if cost < best_cost:
                best_cost = cost
                best_mode = mode
                best_children = kids
        node = PartitionNode(
            region=r,
            chosen=best_mode,
            cost=best_cost,
            children=tuple(best_children),
            evaluated_modes=frozenset(evaluated),
            skipped_modes=frozenset(skipped),
        )
        memo[key] = node
        skipped_total += len(skipped)
        return node

    root = visit(region.x, region.y, region.w, region.h, mtt_depth)
    stats = SearchStats(
        nodes_visited=len(memo),
        leaf_count=count_leaves(root),
        total_cost=root.cost,
        modes_skipped_by_flag=skipped_total,
        wall_time=time.perf_counter() - t0,
        fingerprint=input_fingerprint(region, mtt_depth, cfg),
    )
    return root, stats


def count_leaves(node: PartitionNode) -> int:
    if node.chosen == SplitMode.NOS:
        return 1
    return sum(count_leaves(c) for c in node.children)


def compare_runs(baseline: SearchStats, fast: SearchStats) -> dict:
    """Reduction/inflation record for a baseline-vs-fast pair over one input."""
    if baseline.fingerprint != fast.fingerprint:
        raise ValueError(
            "mismatched input fingerprints: runs cover different inputs or configs"
        )
    return {
        "nodes_baseline": baseline.nodes_visited,
        "nodes_fast": fast.nodes_visited,
        "node_reduction_pct": 100.0 * (1.0 - fast.nodes_visited / baseline.nodes_visited),
        "cost_baseline": baseline.total_cost,
        "cost_fast": fast.total_cost,
        "cost_inflation_pct": 100.0 * (fast.total_cost / baseline.total_cost - 1.0),
        "wall_time_reduction_pct": 100.0 * (1.0 - fast.wall_time / baseline.wall_time),
        "modes_skipped_by_flag": fast.modes_skipped_by_flag,
    }


def node_to_dict(node: PartitionNode) -> dict:
    """Nested plain-record form of a partition tree for serialization."""
    return {
        "x": node.region.x,
        "y": node.region.y,
        "w": node.region.w,
        "h": node.region.h,
        "mode": node.chosen.name,
        "cost": node.cost,
        "children": [node_to_dict(c) for c in node.children],
    }
