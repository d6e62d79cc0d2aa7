"""Vectorized whole-frame search engine.

Runs the same QTMT search as `partition_search.search` over every CTU of a
frame at once: the state graph of one CTU is geometry-only, so it is built
once per config and evaluated with array operations over (ctu, state) grids.
Pixel work goes through two whole-plane tables — integral images of the
plane/its squares and of the four |Sobel response| maps — which make every
block sum, squared sum and interior gradient sum an O(1) rectangle query.

Every arithmetic expression here mirrors the scalar implementations
operation for operation, so costs, flags and chosen modes are bit-identical
to the recursive engine (asserted by differential tests).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .frame_io import SplitMode
from .partition_search import SPLIT_BIT_PROXY, SearchConfig, legal_modes_wh

_MTT_LANES = (SplitMode.QTS, SplitMode.BHS, SplitMode.BVS, SplitMode.THS, SplitMode.TVS)
_LANE_CHILDREN = {
    SplitMode.QTS: 4,
    SplitMode.BHS: 2,
    SplitMode.BVS: 2,
    SplitMode.THS: 3,
    SplitMode.TVS: 3,
}

# separation axes for flag/statistics queries
AXES = ("bt_h", "bt_v", "tt_h", "tt_v")


def _child_keys(x, y, w, h, d, mode):
    nd = 0 if mode == SplitMode.QTS else d + 1
    if mode == SplitMode.QTS:
        hw, hh = w // 2, h // 2
        return [
            (x, y, hw, hh, nd),
            (x + hw, y, hw, hh, nd),
            (x, y + hh, hw, hh, nd),
            (x + hw, y + hh, hw, hh, nd),
        ]
    if mode == SplitMode.BHS:
        hh = h // 2
        return [(x, y, w, hh, nd), (x, y + hh, w, hh, nd)]
    if mode == SplitMode.BVS:
        hw = w // 2
        return [(x, y, hw, h, nd), (x + hw, y, hw, h, nd)]
    if mode == SplitMode.THS:
        q = h // 4
        return [(x, y, w, q, nd), (x, y + q, w, 2 * q, nd), (x, y + 3 * q, w, q, nd)]
    q = w // 4
    return [(x, y, q, h, nd), (x + q, y, 2 * q, h, nd), (x + 3 * q, y, q, h, nd)]


class SearchPlan:
    """Per-config state graph of one CTU's search space.

    State = (x, y, w, h, mtt_depth) relative to the CTU origin; index 0 is
    the root. `ch[mode]` holds child state indices (n, n_children) with the
    out-of-range index n where the mode is illegal, so vectorized scatter
    writes can dump into a trash column.
    """

    def __init__(self, cfg: SearchConfig):
        cs = cfg.ctu_size
        keys = [(0, 0, cs, cs, 0)]
        key2idx = {keys[0]: 0}
        legal_sets = []
        children: dict[SplitMode, list] = {m: [] for m in _MTT_LANES}
        qi = 0
        while qi < len(keys):
            x, y, w, h, d = keys[qi]
            legal = legal_modes_wh(w, h, d, cfg)
            legal_sets.append(legal)
            for mode in _MTT_LANES:
                if mode not in legal:
                    children[mode].append(None)
                    continue
                idxs = []
                for key in _child_keys(x, y, w, h, d, mode):
                    ci = key2idx.get(key)
                    if ci is None:
                        ci = len(keys)
                        key2idx[key] = ci
                        keys.append(key)
                    idxs.append(ci)
                children[mode].append(idxs)
            qi += 1

        n = len(keys)
        self.n = n
        arr = np.array(keys, dtype=np.int64)
        self.x, self.y, self.w, self.h, self.d = (arr[:, i].copy() for i in range(5))
        self.legal = np.zeros((6, n), dtype=bool)
        self.legal[SplitMode.NOS] = True
        self.ch: dict[SplitMode, np.ndarray] = {}
        for mode in _MTT_LANES:
            k = _LANE_CHILDREN[mode]
            ch = np.full((n, k), n, dtype=np.int64)  # n = trash column
            for i, idxs in enumerate(children[mode]):
                if idxs is not None:
                    self.legal[mode, i] = True
                    ch[i] = idxs
            self.ch[mode] = ch

        # unique regions (ignoring depth) for predictor-SSE sharing
        rkey2rid: dict[tuple, int] = {}
        rid = np.empty(n, dtype=np.int64)
        rects = []
        for i, (x, y, w, h, d) in enumerate(keys):
            rk = (x, y, w, h)
            ri = rkey2rid.get(rk)
            if ri is None:
                ri = len(rects)
                rkey2rid[rk] = ri
                rects.append(rk)
            rid[i] = ri
        self.rid = rid
        rarr = np.array(rects, dtype=np.int64)
        self.m = len(rects)
        self.rx, self.ry, self.rw, self.rh = (rarr[:, i].copy() for i in range(4))

        # evaluation order: states grouped by block area; every split strictly
        # shrinks area, so ascending groups give children-before-parents
        areas = self.w * self.h
        uniq = np.unique(areas)
        self.groups_asc = [np.flatnonzero(areas == a) for a in uniq]
        self.groups_desc = list(reversed(self.groups_asc))

        self.bits = 32.0 + (self.w * self.h) / 16.0
        self.rbits = 32.0 + (self.rw * self.rh) / 16.0

        # flag availability (geometry-only). Binary flags need both halvings
        # with every half at least 3x3; ternary flags are per-axis.
        some_bt = self.legal[SplitMode.BHS] | self.legal[SplitMode.BVS]
        even = (self.w % 2 == 0) & (self.h % 2 == 0)
        self.bt_avail = some_bt & even & (self.w >= 6) & (self.h >= 6)
        self.th_avail = self.legal[SplitMode.THS] & (self.w >= 3) & (self.h // 4 >= 3)
        self.tv_avail = self.legal[SplitMode.TVS] & (self.h >= 3) & (self.w // 4 >= 3)

        # per-axis availability for gradient statistics (independent of the
        # joint flag precondition and of mode legality on the other axis)
        self.stat_avail = {
            "bt_h": (self.h % 2 == 0) & (self.w >= 3) & (self.h // 2 >= 3),
            "bt_v": (self.w % 2 == 0) & (self.h >= 3) & (self.w // 2 >= 3),
            "tt_h": (self.h % 4 == 0) & (self.w >= 3) & (self.h // 4 >= 3),
            "tt_v": (self.w % 4 == 0) & (self.h >= 3) & (self.w // 4 >= 3),
        }


_PLAN_CACHE: dict[tuple, SearchPlan] = {}


def get_plan(cfg: SearchConfig) -> SearchPlan:
    key = (cfg.ctu_size, cfg.min_cu, cfg.max_mtt_depth, cfg.min_tt_size)
    plan = _PLAN_CACHE.get(key)
    if plan is None:
        plan = SearchPlan(cfg)
        _PLAN_CACHE[key] = plan
    return plan


def _prefix2d(m: np.ndarray) -> np.ndarray:
    P = np.zeros((m.shape[0] + 1, m.shape[1] + 1), dtype=np.int64)
    P[1:, 1:] = m.cumsum(axis=0, dtype=np.int64).cumsum(axis=1, dtype=np.int64)
    return P


def _rect(P: np.ndarray, X, Y, W, H):
    """Rectangle sums from an integral image; arguments broadcast."""
    y2 = Y + H
    x2 = X + W
    return P[y2, x2] - P[Y, x2] - P[y2, X] + P[Y, X]


def _ratio(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    hi = np.maximum(a, b)
    lo = np.minimum(a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = hi / lo
    return np.where(lo == 0.0, np.where(hi == 0.0, 1.0, np.inf), r)


@dataclass
class FrameTables:
    """Whole-plane integral images for one frame."""

    shape: tuple[int, int]
    psum: np.ndarray | None = None  # (H+1, W+1) pixel sums
    psq: np.ndarray | None = None  # (H+1, W+1) squared-pixel sums
    grad: list[np.ndarray] | None = None  # 4 x (H-1, W-1) |response| sums


def build_tables(plane_arr: np.ndarray, want_content: bool, want_grad: bool) -> FrameTables:
    t = FrameTables(shape=plane_arr.shape)
    if want_content:
        a64 = plane_arr.astype(np.int64)
        t.psum = _prefix2d(a64)
        t.psq = _prefix2d(a64 * a64)
    if want_grad:
        maps = kernels.sobel_abs_maps(plane_arr)
        t.grad = [_prefix2d(maps[k]) for k in range(4)]
    return t


def _grad_mean(tables: FrameTables, k: int, X, Y, W, H):
    """Mean |response| over a block's interior; W, H must be >= 3."""
    s = _rect(tables.grad[k], X, Y, W - 2, H - 2)
    return s / ((W - 2) * (H - 2))


def _content_diff_arrays(tables, x1, y1, w1, h1, x2, y2, w2, h2):
    """Vector twin of cross_diff.content_diff (same expression order)."""
    s1 = _rect(tables.psum, x1, y1, w1, h1)
    q1 = _rect(tables.psq, x1, y1, w1, h1)
    n1 = w1 * h1
    mu2 = _rect(tables.psum, x2, y2, w2, h2) / (w2 * h2)
    return q1 / n1 - 2.0 * mu2 * (s1 / n1) + mu2 * mu2


def _sub_rects(ax, ay, w, h, axis):
    """Sub-block rectangles of a separation; (x, y, w, h) per part.

    ax, ay are absolute origin arrays; w, h are state dimension arrays
    (broadcast against them)."""
    if axis == "bt_h":
        hh = h // 2
        return [(ax, ay, w, hh), (ax, ay + hh, w, hh)]
    if axis == "bt_v":
        hw = w // 2
        return [(ax, ay, hw, h), (ax + hw, ay, hw, h)]
    if axis == "tt_h":
        q = h // 4
        return [(ax, ay, w, q), (ax, ay + q, w, 2 * q), (ax, ay + 3 * q, w, q)]
    q = w // 4
    return [(ax, ay, q, h), (ax + q, ay, 2 * q, h), (ax + 3 * q, ay, q, h)]


def compute_skip_lanes(plan: SearchPlan, tables: FrameTables, ax, ay, thr) -> dict:
    """Skip flags per mode lane as (n_ctu, n_state) booleans.

    ax, ay: absolute state origins (n_ctu, n_state). Mirrors
    cross_diff.bt_skip / tt_skip exactly on the available subsets.
    """
    n_ctu = ax.shape[0]
    skip = {m: np.zeros((n_ctu, plan.n), dtype=bool) for m in
            (SplitMode.BHS, SplitMode.BVS, SplitMode.THS, SplitMode.TVS)}

    bt = np.flatnonzero(plan.bt_avail)
    if bt.size:
        x = ax[:, bt]
        y = ay[:, bt]
        w = plan.w[bt]
        h = plan.h[bt]
        (bh1, bh2) = _sub_rects(x, y, w, h, "bt_h")
        (bv1, bv2) = _sub_rects(x, y, w, h, "bt_v")
        agree_bh = np.ones(x.shape, dtype=bool)
        agree_bv = np.ones(x.shape, dtype=bool)
        for k in range(4):
            r = _ratio(_grad_mean(tables, k, *bh1), _grad_mean(tables, k, *bh2))
            agree_bh &= r < thr.t1
            r = _ratio(_grad_mean(tables, k, *bv1), _grad_mean(tables, k, *bv2))
            agree_bv &= r < thr.t1
        mh = _ratio(
            _content_diff_arrays(tables, *bh1, *bh2),
            _content_diff_arrays(tables, *bh2, *bh1),
        )
        mv = _ratio(
            _content_diff_arrays(tables, *bv1, *bv2),
            _content_diff_arrays(tables, *bv2, *bv1),
        )
        with np.errstate(invalid="ignore"):
            dc_bh = (mv / mh < 1.0) & (mh > thr.t2)
            dc_bv = (mh / mv < 1.0) & (mv > thr.t2)
        skip[SplitMode.BHS][:, bt] = agree_bh | dc_bv
        skip[SplitMode.BVS][:, bt] = agree_bv | dc_bh

    for axis, avail, lane, k in (
        ("tt_h", plan.th_avail, SplitMode.THS, 1),
        ("tt_v", plan.tv_avail, SplitMode.TVS, 0),
    ):
        idx = np.flatnonzero(avail)
        if not idx.size:
            continue
        x = ax[:, idx]
        y = ay[:, idx]
        w = plan.w[idx]
        h = plan.h[idx]
        parts = _sub_rects(x, y, w, h, axis)
        g = [_grad_mean(tables, k, *p) for p in parts]
        ok = _ratio(g[0], g[1]) < thr.t3
        ok &= _ratio(g[0], g[2]) < thr.t3
        ok &= _ratio(g[1], g[2]) < thr.t3
        skip[lane][:, idx] = ok
    return skip


def compute_reach(plan: SearchPlan, skip: dict | None, n_ctu: int) -> np.ndarray:
    """Reachable (= evaluated) states per CTU; (n_ctu, n+1) with trash col."""
    reach = np.zeros((n_ctu, plan.n + 1), dtype=bool)
    reach[:, 0] = True
    for g in plan.groups_desc:
        for mode in _MTT_LANES:
            gl = g[plan.legal[mode][g]]
            if not gl.size:
                continue
            act = reach[:, gl]
            if skip is not None and mode in skip:
                act = act & ~skip[mode][:, gl]
            ch = plan.ch[mode][gl]
            for col in range(ch.shape[1]):
                idx = ch[:, col]
                reach[:, idx] = reach[:, idx] | act
    return reach


def region_min_sse(
    plane_arr: np.ndarray,
    plan: SearchPlan,
    origins: np.ndarray,
    needed: np.ndarray | None,
) -> np.ndarray:
    """Min-of-four-predictors SSE per (ctu, unique region) as float64.

    `needed` restricts the kernel call to a boolean (n_ctu, m) subset;
    entries not computed are 0 (never read by the cost pass).
    """
    n_ctu = origins.shape[0]
    rxa = origins[:, 0:1] + plan.rx[None, :]
    rya = origins[:, 1:2] + plan.ry[None, :]
    rwa = np.broadcast_to(plan.rw[None, :], (n_ctu, plan.m))
    rha = np.broadcast_to(plan.rh[None, :], (n_ctu, plan.m))
    out = np.zeros((n_ctu, plan.m), dtype=np.float64)
    if needed is None:
        sse = kernels.pred_sse_batch(
            plane_arr, rxa.ravel(), rya.ravel(), rwa.ravel(), rha.ravel()
        )
        out[:] = sse.min(axis=1).reshape(n_ctu, plan.m)
    else:
        sel = needed.ravel()
        if sel.any():
            sse = kernels.pred_sse_batch(
                plane_arr,
                rxa.ravel()[sel],
                rya.ravel()[sel],
                rwa.ravel()[sel],
                rha.ravel()[sel],
            )
            out.ravel()[sel] = sse.min(axis=1)
    return out


def cost_pass(
    plan: SearchPlan,
    nos_cost: np.ndarray,
    lam: float,
    skip: dict | None,
) -> tuple[np.ndarray, np.ndarray]:
    """Bottom-up best-cost evaluation; returns (costs, chosen) over
    (n_ctu, n_state). Mirrors the recursive engine's expression order."""
    n_ctu = nos_cost.shape[0]
    costs = np.empty((n_ctu, plan.n), dtype=np.float64)
    chosen = np.zeros((n_ctu, plan.n), dtype=np.int8)
    pen = lam * SPLIT_BIT_PROXY
    for g in plan.groups_asc:
        lanes = [nos_cost[:, g]]
        for mode in _MTT_LANES:
            lg = plan.legal[mode][g]
            if not lg.any():
                lanes.append(np.full((n_ctu, g.size), np.inf))
                continue
            ch = plan.ch[mode][g]
            safe = np.where(lg[None, :], np.minimum(ch.T, plan.n - 1), 0)
            cc = costs[:, safe[0]]
            for col in range(1, ch.shape[1]):
                cc = cc + costs[:, safe[col]]
            cc = cc + pen
            cc[:, ~lg] = np.inf
            if skip is not None and mode in skip:
                cc[skip[mode][:, g]] = np.inf
            lanes.append(cc)
        stack = np.stack(lanes)
        chosen[:, g] = np.argmin(stack, axis=0)
        costs[:, g] = np.min(stack, axis=0)
    return costs, chosen


def chosen_tree_mask(plan: SearchPlan, chosen: np.ndarray) -> np.ndarray:
    """Membership of each state in the final chosen tree; (n_ctu, n+1)."""
    n_ctu = chosen.shape[0]
    in_tree = np.zeros((n_ctu, plan.n + 1), dtype=bool)
    in_tree[:, 0] = True
    for g in plan.groups_desc:
        for mode in _MTT_LANES:
            gl = g[plan.legal[mode][g]]
            if not gl.size:
                continue
            act = in_tree[:, gl] & (chosen[:, gl] == int(mode))
            if not act.any():
                continue
            ch = plan.ch[mode][gl]
            for col in range(ch.shape[1]):
                idx = ch[:, col]
                in_tree[:, idx] = in_tree[:, idx] | act
    return in_tree


def ctu_origins(width: int, height: int, ctu: int) -> np.ndarray:
    """Raster-order origins of the full CTUs that fit the frame; trailing
    partial rows/columns are not searched."""
    xs = np.arange(0, width - ctu + 1, ctu, dtype=np.int64)
    ys = np.arange(0, height - ctu + 1, ctu, dtype=np.int64)
    if xs.size == 0 or ys.size == 0:
        raise ValueError(
            f"frame {width}x{height} holds no full {ctu}x{ctu} CTU"
        )
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])


# separation axis -> (gradient stats pairs, part count)
_AXIS_PARTS = {"bt_h": 2, "bt_v": 2, "tt_h": 3, "tt_v": 3}


def axis_pair_ratios(plan, tables, ax, ay, axis):
    """Gradient M-ratio arrays of one separation axis for statistics.

    Returns (state_idx, {(pair_name, dir): ratio_array}) where the arrays
    cover (n_ctu, len(state_idx)) and pair_name is like "1:2".
    """
    idx = np.flatnonzero(plan.stat_avail[axis])
    out = {}
    if not idx.size:
        return idx, out
    x = ax[:, idx]
    y = ay[:, idx]
    w = plan.w[idx]
    h = plan.h[idx]
    parts = _sub_rects(x, y, w, h, axis)
    means = [
        [_grad_mean(tables, k, *p) for k in range(4)]
        for p in parts
    ]
    npart = len(parts)
    from .gradient import DIRECTIONS

    for i in range(npart):
        for j in range(i + 1, npart):
            pname = f"{i + 1}:{j + 1}"
            for k, dname in enumerate(DIRECTIONS):
                out[(pname, dname)] = _ratio(means[i][k], means[j][k])
    return idx, out


@dataclass
class FrameLegOutcome:
    """Per-QP totals over one frame for one leg."""

    nodes: dict[int, int] = field(default_factory=dict)
    cost: dict[int, float] = field(default_factory=dict)
    leaves: dict[int, int] = field(default_factory=dict)
    skips: dict[int, dict[str, int]] = field(default_factory=dict)
    wall: float = 0.0


_SKIP_LANES = (SplitMode.BHS, SplitMode.BVS, SplitMode.THS, SplitMode.TVS)


def _finish_leg(
    plan: SearchPlan,
    min_sse: np.ndarray,
    qp_lams,
    skip: dict | None,
    reach: np.ndarray,
    stats_sink=None,
    axis_ratios=None,
) -> FrameLegOutcome:
    """Per-QP cost passes over precomputed reach/SSE; fills one outcome."""
    out = FrameLegOutcome()
    reach_states = reach[:, : plan.n]
    nodes = int(reach_states.sum())
    if skip is not None:
        skip_counts = {
            m.name: int((skip[m] & plan.legal[m][None, :] & reach_states).sum())
            for m in _SKIP_LANES
        }
    else:
        skip_counts = {m.name: 0 for m in _SKIP_LANES}

    for qp, lam in qp_lams:
        nos_cost = min_sse[:, plan.rid] + lam * plan.bits[None, :]
        costs, chosen = cost_pass(plan, nos_cost, lam, skip)
        in_tree = chosen_tree_mask(plan, chosen)
        leaves = int(
            (in_tree[:, : plan.n] & (chosen == int(SplitMode.NOS))).sum()
        )
        out.nodes[qp] = nodes
        out.cost[qp] = float(costs[:, 0].sum())
        out.leaves[qp] = leaves
        out.skips[qp] = dict(skip_counts)
        if stats_sink is not None:
            stats_sink(chosen, axis_ratios)
    return out


def run_frame_leg(
    plane_arr: np.ndarray,
    cfg: SearchConfig,
    qp_lams: list[tuple[int, float]],
    fast: bool,
    stats_sink=None,
) -> FrameLegOutcome:
    """Search every CTU of one frame at the given QPs, one leg.

    `stats_sink(chosen, axis_ratios)` is called per QP when collecting
    gradient statistics, with `axis_ratios[axis] = (state_idx, ratio_dict)`
    computed once per frame (the ratios do not depend on QP). Statistics are
    meant for the baseline leg, whose chosen modes cover every state.
    """
    t0 = time.perf_counter()
    plan = get_plan(cfg)
    origins = ctu_origins(plane_arr.shape[1], plane_arr.shape[0], cfg.ctu_size)
    n_ctu = origins.shape[0]
    ax = origins[:, 0:1] + plan.x[None, :]
    ay = origins[:, 1:2] + plan.y[None, :]

    want_grad = fast or stats_sink is not None
    tables = build_tables(plane_arr, want_content=fast, want_grad=want_grad)

    if fast:
        skip = compute_skip_lanes(plan, tables, ax, ay, cfg.thresholds)
        reach = compute_reach(plan, skip, n_ctu)
        needed = np.zeros((n_ctu, plan.m), dtype=bool)
        np.logical_or.at(needed, (slice(None), plan.rid), reach[:, : plan.n])
        min_sse = region_min_sse(plane_arr, plan, origins, needed)
    else:
        skip = None
        reach = compute_reach(plan, None, n_ctu)
        min_sse = region_min_sse(plane_arr, plan, origins, None)

    axis_ratios = None
    if stats_sink is not None:
        axis_ratios = {
            axis: axis_pair_ratios(plan, tables, ax, ay, axis) for axis in AXES
        }

    out = _finish_leg(plan, min_sse, qp_lams, skip, reach, stats_sink, axis_ratios)
    out.wall = time.perf_counter() - t0
    return out


def run_frame_sweep(
    plane_arr: np.ndarray,
    cfg: SearchConfig,
    qp_lams: list[tuple[int, float]],
    points,
) -> tuple[FrameLegOutcome, list[FrameLegOutcome]]:
    """Baseline leg plus one fast leg per threshold point, sharing the frame
    tables and the full predictor-SSE table across all points.

    The full SSE table matches the per-point subset computation entry for
    entry, and entries outside a point's reach never feed its cost pass, so
    each point's outcome is identical to a standalone `run_frame_leg`.
    """
    plan = get_plan(cfg)
    origins = ctu_origins(plane_arr.shape[1], plane_arr.shape[0], cfg.ctu_size)
    n_ctu = origins.shape[0]
    ax = origins[:, 0:1] + plan.x[None, :]
    ay = origins[:, 1:2] + plan.y[None, :]

    t0 = time.perf_counter()
    tables = build_tables(plane_arr, want_content=True, want_grad=True)
    min_sse = region_min_sse(plane_arr, plan, origins, None)
    base = _finish_leg(plan, min_sse, qp_lams, None, compute_reach(plan, None, n_ctu))
    base.wall = time.perf_counter() - t0

    outcomes = []
    for thr in points:
        t0 = time.perf_counter()
        skip = compute_skip_lanes(plan, tables, ax, ay, thr)
        reach = compute_reach(plan, skip, n_ctu)
        out = _finish_leg(plan, min_sse, qp_lams, skip, reach)
        out.wall = time.perf_counter() - t0
        outcomes.append(out)
    return base, outcomes
