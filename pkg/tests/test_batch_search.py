import numpy as np
import pytest

from qtmtprune import LumaPlane, Region, SearchConfig, Thresholds, lambda_from_qp, search
from qtmtprune.batch_search import ctu_origins, run_frame_leg, run_frame_sweep
from qtmtprune.synth import gen_frame_mixed


def test_ctu_origins_layout():
    got = ctu_origins(256, 128, 64)
    assert got.shape == (8, 2)
    assert got[0].tolist() == [0, 0]
    assert got[1].tolist() == [64, 0]  # raster order: x fastest
    assert got[-1].tolist() == [192, 64]


def test_ctu_origins_partial_edges_dropped():
    assert ctu_origins(100, 70, 64).tolist() == [[0, 0]]
    with pytest.raises(ValueError):
        ctu_origins(63, 256, 64)


def _leg_by_hand(arr, qp, fast, base_cfg):
    plane = LumaPlane(arr)
    cfg = SearchConfig(
        ctu_size=base_cfg.ctu_size,
        min_cu=base_cfg.min_cu,
        max_mtt_depth=base_cfg.max_mtt_depth,
        min_tt_size=base_cfg.min_tt_size,
        qp=qp,
        thresholds=base_cfg.thresholds,
        fast_enabled=fast,
    )
    nodes = cost = leaves = skips = 0
    for x, y in ctu_origins(plane.width, plane.height, cfg.ctu_size):
        _, st = search(Region(plane, int(x), int(y), cfg.ctu_size, cfg.ctu_size), 0, cfg)
        nodes += st.nodes_visited
        cost += st.total_cost
        leaves += st.leaf_count
        skips += st.modes_skipped_by_flag
    return nodes, cost, leaves, skips


@pytest.mark.parametrize("fast", [False, True])
def test_frame_leg_matches_per_ctu_search(fast):
    arr = gen_frame_mixed(128, 128, seed=3, index=0)
    cfg = SearchConfig()
    qps = [22, 32]
    leg = run_frame_leg(arr, cfg, [(q, lambda_from_qp(q)) for q in qps], fast=fast)
    for q in qps:
        nodes, cost, leaves, skips = _leg_by_hand(arr, q, fast, cfg)
        assert leg.nodes[q] == nodes
        assert leg.cost[q] == pytest.approx(cost, rel=1e-12)
        assert leg.leaves[q] == leaves
        assert sum(leg.skips[q].values()) == skips
    if not fast:
        assert all(v == 0 for q in qps for v in leg.skips[q].values())


def test_frame_sweep_points_match_standalone_legs():
    arr = gen_frame_mixed(128, 128, seed=5, index=1)
    cfg = SearchConfig()
    qp_lams = [(27, lambda_from_qp(27)), (37, lambda_from_qp(37))]
    points = [
        Thresholds(1.05, 2.0, 1.5),
        Thresholds(1.180, 3.500, 2.000),
        Thresholds(4.0, 8.0, 6.0),
    ]
    base, fasts = run_frame_sweep(arr, cfg, qp_lams, points)
    ref_base = run_frame_leg(arr, cfg, qp_lams, fast=False)
    assert base.nodes == ref_base.nodes
    assert base.cost == ref_base.cost
    assert base.leaves == ref_base.leaves
    assert len(fasts) == len(points)
    for pt, leg in zip(points, fasts):
        pt_cfg = SearchConfig(thresholds=pt)
        ref = run_frame_leg(arr, pt_cfg, qp_lams, fast=True)
        assert leg.nodes == ref.nodes
        assert leg.cost == ref.cost
        assert leg.leaves == ref.leaves
        assert leg.skips == ref.skips


def test_sweep_threshold_ordering():
    # looser thresholds can only skip more: nodes shrink as points loosen
    arr = gen_frame_mixed(128, 128, seed=8, index=2)
    cfg = SearchConfig()
    qp_lams = [(32, lambda_from_qp(32))]
    points = [Thresholds(t, 1e9, 1e9) for t in (1.05, 1.18, 1.5, 3.0)]
    _, fasts = run_frame_sweep(arr, cfg, qp_lams, points)
    nodes = [leg.nodes[32] for leg in fasts]
    assert nodes == sorted(nodes, reverse=True)
