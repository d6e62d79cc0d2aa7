"""Run reports and gradient-ratio statistics.

Holds the cross-block gradient ratio table (per chosen mode, separation
axis, sub-block pair and direction), the corpus runner that drives the
vectorized engine over frame lists (optionally in worker processes), and
the report builders plus canonical JSON / CSV serialization.

Determinism contract: every float accumulation happens in a fixed order
(frames in index order, inputs in argument order, QPs in argument order),
and worker processes only ever return per-frame results that the parent
merges sequentially — so reports are byte-identical for any worker count.
"""

from __future__ import annotations

import csv
import io
import json
import multiprocessing
from dataclasses import dataclass

import numpy as np

from .batch_search import AXES, FrameLegOutcome, run_frame_leg, run_frame_sweep
from .cross_diff import Thresholds
from .frame_io import LumaPlane, SplitMode
from .gradient import DIRECTIONS
from .partition_search import SearchConfig, lambda_from_qp

MODE_NAMES = tuple(m.name for m in SplitMode)

# sub-block pairs per separation axis ("i:j" = i-th vs j-th part, 1-based)
AXIS_PAIRS = {
    "bt_h": ("1:2",),
    "bt_v": ("1:2",),
    "tt_h": ("1:2", "1:3", "2:3"),
    "tt_v": ("1:2", "1:3", "2:3"),
}

_SKIP_LANE_NAMES = ("BHS", "BVS", "THS", "TVS")


class GradientStatsTable:
    """Running means of cross-block gradient ratios.

    Cell key: (chosen mode, separation axis, sub-block pair, direction).
    Ratios are pooled per block (one sample per visited node), non-finite
    ratios are excluded.
    """

    __slots__ = ("sums", "counts")

    def __init__(self):
        self.sums = {
            axis: {p: {d: np.zeros(6) for d in DIRECTIONS} for p in AXIS_PAIRS[axis]}
            for axis in AXES
        }
        self.counts = {
            axis: {p: {d: np.zeros(6, np.int64) for d in DIRECTIONS} for p in AXIS_PAIRS[axis]}
            for axis in AXES
        }

    def add_sample(self, mode: SplitMode, axis: str, pair: str, direction: str, value: float) -> None:
        if not np.isfinite(value):
            return
        self.sums[axis][pair][direction][int(mode)] += value
        self.counts[axis][pair][direction][int(mode)] += 1

    def add_binned(self, axis: str, pair: str, direction: str, sums6, counts6) -> None:
        self.sums[axis][pair][direction] += sums6
        self.counts[axis][pair][direction] += counts6

    def merge(self, other: "GradientStatsTable") -> None:
        for axis in AXES:
            for pair in AXIS_PAIRS[axis]:
                for d in DIRECTIONS:
                    self.sums[axis][pair][d] += other.sums[axis][pair][d]
                    self.counts[axis][pair][d] += other.counts[axis][pair][d]

    def count(self, mode: SplitMode, axis: str, pair: str, direction: str) -> int:
        return int(self.counts[axis][pair][direction][int(mode)])

    def mean(self, mode: SplitMode, axis: str, pair: str, direction: str) -> float | None:
        c = self.counts[axis][pair][direction][int(mode)]
        if c == 0:
            return None
        return float(self.sums[axis][pair][direction][int(mode)] / c)

    def pooled_mean(self, mode: SplitMode, axis: str, direction: str) -> float | None:
        """Mean over all sub-block pairs of the axis."""
        s = 0.0
        c = 0
        for pair in AXIS_PAIRS[axis]:
            s += float(self.sums[axis][pair][direction][int(mode)])
            c += int(self.counts[axis][pair][direction][int(mode)])
        if c == 0:
            return None
        return s / c

    def to_dict(self) -> dict:
        out = {}
        for mode in SplitMode:
            maxes = {}
            for axis in AXES:
                mpairs = {}
                for pair in AXIS_PAIRS[axis]:
                    mdirs = {}
                    for d in DIRECTIONS:
                        mdirs[d] = {
                            "count": self.count(mode, axis, pair, d),
                            "mean": self.mean(mode, axis, pair, d),
                        }
                    mpairs[pair] = mdirs
                maxes[axis] = mpairs
            out[mode.name] = maxes
        return out


def make_stats_sink(table: GradientStatsTable):
    """Adapter feeding engine ratio arrays into a table.

    Receives (chosen, axis_ratios) per QP from the frame runner; buckets
    every available separation's ratios by the node's chosen mode.
    """

    def sink(chosen: np.ndarray, axis_ratios: dict) -> None:
        for axis in AXES:
            idx, ratios = axis_ratios[axis]
            if idx.size == 0:
                continue
            ch = chosen[:, idx].astype(np.int64).ravel()
            for pair in AXIS_PAIRS[axis]:
                for d in DIRECTIONS:
                    r = ratios[(pair, d)].ravel()
                    finite = np.isfinite(r)
                    if finite.all():
                        rv, cv = r, ch
                    else:
                        rv, cv = r[finite], ch[finite]
                    if not rv.size:
                        continue
                    sums = np.bincount(cv, weights=rv, minlength=6)
                    counts = np.bincount(cv, minlength=6)
                    table.add_binned(axis, pair, d, sums, counts)

    return sink


def collect_gradient_stats(frames: list[LumaPlane], cfg: SearchConfig) -> GradientStatsTable:
    """Gradient-ratio table over a frame list at cfg's QP.

    Runs the full (unpruned) search so every node of the search space is
    visited and bucketed by its chosen mode; frames accumulate in order.
    """
    table = GradientStatsTable()
    for plane in frames:
        ft = GradientStatsTable()
        run_frame_leg(
            plane.data, cfg, [(cfg.qp, cfg.lam)], fast=False, stats_sink=make_stats_sink(ft)
        )
        table.merge(ft)
    return table


# ---------------------------------------------------------------------------
# corpus runner (optionally process-parallel; deterministic merge order)


def _frame_worker(payload):
    arr, cfg, qp_lams, run_baseline, run_fast, collect = payload
    table = GradientStatsTable() if collect else None
    ob = of = None
    if run_baseline:
        sink = make_stats_sink(table) if collect else None
        ob = run_frame_leg(arr, cfg, qp_lams, fast=False, stats_sink=sink)
    if run_fast:
        of = run_frame_leg(arr, cfg, qp_lams, fast=True)
    return ob, of, table


def _sweep_worker(payload):
    arr, cfg, qp_lams, points = payload
    return run_frame_sweep(arr, cfg, qp_lams, points)


def _map_frames(worker, payloads, threads: int) -> list:
    if threads <= 1 or len(payloads) <= 1:
        return [worker(p) for p in payloads]
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(min(threads, len(payloads))) as pool:
        return pool.map(worker, payloads, chunksize=1)


def run_corpus(
    frames: list[LumaPlane],
    cfg: SearchConfig,
    qps: list[int],
    run_baseline: bool = True,
    run_fast: bool = True,
    collect_stats: bool = False,
    threads: int = 1,
):
    """Both legs over a frame list; returns (baseline, fast, table) where the
    legs are per-frame outcome lists (or None) and the table is merged in
    frame order when requested (statistics come from the baseline leg)."""
    qp_lams = [(qp, lambda_from_qp(qp)) for qp in qps]
    payloads = [(pl.data, cfg, qp_lams, run_baseline, run_fast, collect_stats) for pl in frames]
    results = _map_frames(_frame_worker, payloads, threads)
    outs_b = [r[0] for r in results] if run_baseline else None
    outs_f = [r[1] for r in results] if run_fast else None
    table = None
    if collect_stats:
        table = GradientStatsTable()
        for r in results:
            table.merge(r[2])
    return outs_b, outs_f, table


def run_sweep_corpus(
    frames: list[LumaPlane],
    cfg: SearchConfig,
    qps: list[int],
    points: list[Thresholds],
    threads: int = 1,
):
    """Shared-baseline threshold sweep; returns (baseline outcomes,
    per-frame lists of per-point outcomes)."""
    qp_lams = [(qp, lambda_from_qp(qp)) for qp in qps]
    payloads = [(pl.data, cfg, qp_lams, points) for pl in frames]
    results = _map_frames(_sweep_worker, payloads, threads)
    return [r[0] for r in results], [r[1] for r in results]


# ---------------------------------------------------------------------------
# report assembly


def node_reduction_pct(nodes_baseline: float, nodes_fast: float) -> float:
    return 100.0 * (1.0 - nodes_fast / nodes_baseline)


def cost_inflation_pct(cost_baseline: float, cost_fast: float) -> float:
    return 100.0 * (cost_fast / cost_baseline - 1.0)


def _sum_leg(outcomes: list[FrameLegOutcome], qp: int):
    """Frame-order totals of one leg at one QP: (nodes, cost, leaves, skips)."""
    nodes = 0
    cost = 0.0
    leaves = 0
    skips = {name: 0 for name in _SKIP_LANE_NAMES}
    for o in outcomes:
        nodes += o.nodes[qp]
        cost = cost + o.cost[qp]
        leaves += o.leaves[qp]
        for name in _SKIP_LANE_NAMES:
            skips[name] += o.skips[qp][name]
    return nodes, cost, leaves, skips


def _merge_skips(parts: list[dict]) -> dict:
    out = {name: 0 for name in _SKIP_LANE_NAMES}
    for p in parts:
        for name in _SKIP_LANE_NAMES:
            out[name] += p[name]
    return out


def _compare_cell(nb, cb, lb, nf, cf, lf, skips) -> dict:
    return {
        "nodes_baseline": nb,
        "nodes_fast": nf,
        "node_reduction_pct": node_reduction_pct(nb, nf),
        "cost_baseline": cb,
        "cost_fast": cf,
        "cost_inflation_pct": cost_inflation_pct(cb, cf),
        "leaves_baseline": lb,
        "leaves_fast": lf,
        "modes_skipped_by_flag": skips,
    }


def _baseline_cell(nb, cb, lb) -> dict:
    return {"nodes": nb, "cost": cb, "leaves": lb}


@dataclass
class RunReport:
    """One CLI run's result document; `to_dict` is what gets serialized."""

    command: str
    config: dict
    inputs: list[dict]
    per_qp: list[dict]
    overall: dict
    metadata: dict
    gradient_stats: dict | None = None
    points: list[dict] | None = None
    timing: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "command": self.command,
            "config": self.config,
            "inputs": self.inputs,
            "per_qp": self.per_qp,
            "overall": self.overall,
            "metadata": self.metadata,
        }
        if self.gradient_stats is not None:
            out["gradient_stats"] = self.gradient_stats
        if self.points is not None:
            out["points"] = self.points
        if self.timing is not None:
            out["timing"] = self.timing
        return out


_BASE_METADATA = {
    "ratio_pooling": "per_block",
    "nonfinite_ratios": "excluded",
    "nodes_metric": "distinct_blocks_evaluated",
}


def _wall_sums(per_input_outcomes) -> float:
    total = 0.0
    for seq in per_input_outcomes:
        for o in seq:
            total += o.wall
    return total


def build_compare_report(
    config: dict,
    inputs: list[dict],
    qps: list[int],
    base_by_input: list[list[FrameLegOutcome]],
    fast_by_input: list[list[FrameLegOutcome]],
    table: GradientStatsTable | None = None,
    timing: bool = False,
) -> RunReport:
    per_qp = []
    tot_nb = tot_nf = tot_lb = tot_lf = 0
    tot_cb = tot_cf = 0.0
    tot_skips = []
    for qp in qps:
        seq_cells = []
        q_nb = q_nf = q_lb = q_lf = 0
        q_cb = q_cf = 0.0
        q_skips = []
        for meta, ob, of in zip(inputs, base_by_input, fast_by_input):
            nb, cb, lb, _ = _sum_leg(ob, qp)
            nf, cf, lf, sk = _sum_leg(of, qp)
            cell = _compare_cell(nb, cb, lb, nf, cf, lf, sk)
            cell["input"] = meta["name"]
            seq_cells.append(cell)
            q_nb += nb
            q_nf += nf
            q_lb += lb
            q_lf += lf
            q_cb = q_cb + cb
            q_cf = q_cf + cf
            q_skips.append(sk)
        agg = _compare_cell(q_nb, q_cb, q_lb, q_nf, q_cf, q_lf, _merge_skips(q_skips))
        per_qp.append(
            {"qp": qp, "lambda": lambda_from_qp(qp), "sequences": seq_cells, "aggregate": agg}
        )
        tot_nb += q_nb
        tot_nf += q_nf
        tot_lb += q_lb
        tot_lf += q_lf
        tot_cb = tot_cb + q_cb
        tot_cf = tot_cf + q_cf
        tot_skips.append(agg["modes_skipped_by_flag"])
    overall = _compare_cell(tot_nb, tot_cb, tot_lb, tot_nf, tot_cf, tot_lf, _merge_skips(tot_skips))
    report = RunReport(
        command="compare",
        config=config,
        inputs=inputs,
        per_qp=per_qp,
        overall=overall,
        metadata=dict(_BASE_METADATA),
        gradient_stats=table.to_dict() if table is not None else None,
    )
    if timing:
        wb = _wall_sums(base_by_input)
        wf = _wall_sums(fast_by_input)
        report.timing = {
            "baseline_wall": wb,
            "fast_wall": wf,
            "wall_time_reduction_pct": 100.0 * (1.0 - wf / wb) if wb > 0.0 else None,
        }
    return report


def build_stats_report(
    config: dict,
    inputs: list[dict],
    qps: list[int],
    base_by_input: list[list[FrameLegOutcome]],
    table: GradientStatsTable,
    timing: bool = False,
) -> RunReport:
    per_qp = []
    tot_n = tot_l = 0
    tot_c = 0.0
    for qp in qps:
        seq_cells = []
        q_n = q_l = 0
        q_c = 0.0
        for meta, ob in zip(inputs, base_by_input):
            nb, cb, lb, _ = _sum_leg(ob, qp)
            cell = _baseline_cell(nb, cb, lb)
            cell["input"] = meta["name"]
            seq_cells.append(cell)
            q_n += nb
            q_l += lb
            q_c = q_c + cb
        per_qp.append(
            {
                "qp": qp,
                "lambda": lambda_from_qp(qp),
                "sequences": seq_cells,
                "aggregate": _baseline_cell(q_n, q_c, q_l),
            }
        )
        tot_n += q_n
        tot_l += q_l
        tot_c = tot_c + q_c
    report = RunReport(
        command="stats",
        config=config,
        inputs=inputs,
        per_qp=per_qp,
        overall=_baseline_cell(tot_n, tot_c, tot_l),
        metadata=dict(_BASE_METADATA),
        gradient_stats=table.to_dict(),
    )
    if timing:
        report.timing = {"baseline_wall": _wall_sums(base_by_input)}
    return report


def build_sweep_report(
    config: dict,
    inputs: list[dict],
    qps: list[int],
    points: list[Thresholds],
    base_by_input: list[list[FrameLegOutcome]],
    sweep_by_input: list[list[list[FrameLegOutcome]]],
    timing: bool = False,
) -> RunReport:
    """sweep_by_input[input][frame][point] -> FrameLegOutcome."""
    per_qp = []
    tot_n = tot_l = 0
    tot_c = 0.0
    for qp in qps:
        q_n = q_l = 0
        q_c = 0.0
        for ob in base_by_input:
            nb, cb, lb, _ = _sum_leg(ob, qp)
            q_n += nb
            q_l += lb
            q_c = q_c + cb
        per_qp.append({"qp": qp, "lambda": lambda_from_qp(qp), "baseline": _baseline_cell(q_n, q_c, q_l)})
        tot_n += q_n
        tot_l += q_l
        tot_c = tot_c + q_c
    overall = {"baseline": _baseline_cell(tot_n, tot_c, tot_l)}

    point_rows = []
    for pi, thr in enumerate(points):
        p_nb = p_nf = p_lb = p_lf = 0
        p_cb = p_cf = 0.0
        p_skips = []
        for ob, frames_pts in zip(base_by_input, sweep_by_input):
            of = [fp[pi] for fp in frames_pts]
            for qp in qps:
                nb, cb, lb, _ = _sum_leg(ob, qp)
                nf, cf, lf, sk = _sum_leg(of, qp)
                p_nb += nb
                p_nf += nf
                p_lb += lb
                p_lf += lf
                p_cb = p_cb + cb
                p_cf = p_cf + cf
                p_skips.append(sk)
        cell = _compare_cell(p_nb, p_cb, p_lb, p_nf, p_cf, p_lf, _merge_skips(p_skips))
        cell["t1"] = thr.t1
        cell["t2"] = thr.t2
        cell["t3"] = thr.t3
        point_rows.append(cell)

    report = RunReport(
        command="sweep",
        config=config,
        inputs=inputs,
        per_qp=per_qp,
        overall=overall,
        metadata=dict(_BASE_METADATA),
        points=point_rows,
    )
    if timing:
        report.timing = {
            "baseline_wall": _wall_sums(base_by_input),
            "points_wall": [
                sum(fp[pi].wall for frames_pts in sweep_by_input for fp in frames_pts)
                for pi in range(len(points))
            ],
        }
    return report


# ---------------------------------------------------------------------------
# serialization


def canonical_json(obj) -> str:
    """Stable JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _flatten(obj, path: str, rows: list) -> None:
    if isinstance(obj, dict) and obj:
        for k in obj:
            if not isinstance(k, str) or not k or "/" in k or k.isdigit():
                raise ValueError(f"key {k!r} not representable in flat CSV paths")
            _flatten(obj[k], f"{path}/{k}" if path else k, rows)
    elif isinstance(obj, list) and obj:
        for i, v in enumerate(obj):
            _flatten(v, f"{path}/{i}" if path else str(i), rows)
    else:
        rows.append((path, json.dumps(obj, sort_keys=True, allow_nan=False)))


def report_to_csv(report: dict) -> str:
    """Flatten a report to `path,value` rows (values JSON-encoded), sorted
    by path. Lossless: `csv_to_report` reproduces the dict exactly."""
    rows: list[tuple[str, str]] = []
    _flatten(report, "", rows)
    rows.sort(key=lambda r: r[0])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["path", "value"])
    w.writerows(rows)
    return buf.getvalue()


def csv_to_report(text: str) -> dict:
    rd = csv.reader(io.StringIO(text))
    header = next(rd)
    if header != ["path", "value"]:
        raise ValueError("not a report CSV: bad header")
    root: dict = {}
    for path, value in rd:
        parts = path.split("/")
        node = root
        for seg in parts[:-1]:
            node = node.setdefault(seg, {})
        node[parts[-1]] = json.loads(value)
    return _listify(root)


def _listify(node):
    if not isinstance(node, dict):
        return node
    out = {k: _listify(v) for k, v in node.items()}
    if out and all(k.isdigit() for k in out):
        idxs = sorted(int(k) for k in out)
        if idxs != list(range(len(idxs))):
            raise ValueError("non-contiguous list indices in CSV paths")
        return [out[str(i)] for i in idxs]
    return out
