import numpy as np
import pytest

from qtmtprune import (
    LumaPlane,
    Region,
    SearchConfig,
    SplitMode,
    compare_runs,
    intra_cost,
    lambda_from_qp,
    legal_modes,
    search,
)
from qtmtprune.partition_search import SPLIT_BIT_PROXY, SearchStats, bit_proxy, count_leaves

from conftest import rand_plane

M = SplitMode


# --- config / lambda ----------------------------------------------------------

def test_lambda_formula():
    assert lambda_from_qp(12) == pytest.approx(0.57)
    assert lambda_from_qp(32) == pytest.approx(0.57 * 2 ** (20 / 3), rel=1e-12)
    assert lambda_from_qp(22) < lambda_from_qp(37)


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(ctu_size=48)
    with pytest.raises(ValueError):
        SearchConfig(min_cu=16, min_tt_size=16)
    with pytest.raises(ValueError):
        SearchConfig(qp=64)
    with pytest.raises(ValueError):
        SearchConfig(lam=-1.0)
    cfg = SearchConfig(qp=27)
    assert cfg.lam == lambda_from_qp(27)


# --- legality -----------------------------------------------------------------

def test_legal_modes_cases():
    p = LumaPlane(np.zeros((64, 64), np.uint8))
    cfg = SearchConfig()
    assert legal_modes(Region(p, 0, 0, 64, 64), 0, cfg) == set(M)
    assert legal_modes(Region(p, 0, 0, 4, 4), 0, cfg) == {M.NOS}
    got = legal_modes(Region(p, 0, 0, 8, 16), 1, cfg)
    assert got == {M.NOS, M.BHS, M.BVS, M.THS}
    # depth budget exhausts the directional modes
    assert legal_modes(Region(p, 0, 0, 32, 32), 3, cfg) == {M.NOS}
    # quad split only before any directional split
    assert M.QTS in legal_modes(Region(p, 0, 0, 32, 32), 0, cfg)
    assert M.QTS not in legal_modes(Region(p, 0, 0, 32, 32), 1, cfg)


# --- cost oracle ----------------------------------------------------------------

def oracle_intra_cost(plane, x, y, w, h, lam):
    """Straight-line four-predictor cost: scalar loops, no shared code."""
    data = plane.data.tolist()
    pw, ph = plane.width, plane.height
    top = [data[y - 1][x + j] if y >= 1 else 128 for j in range(w)]
    left = [data[y + i][x - 1] if x >= 1 else 128 for i in range(h)]
    dc = (sum(top) + sum(left) + (w + h) // 2) // (w + h)
    tr, bl = top[w - 1], left[h - 1]
    sse = [0, 0, 0, 0]
    for i in range(h):
        for j in range(w):
            v = data[y + i][x + j]
            ph_ = (w - 1 - j) * left[i] + (j + 1) * tr
            pv_ = (h - 1 - i) * top[j] + (i + 1) * bl
            planar = (ph_ * h + pv_ * w + w * h) // (2 * w * h)
            for k, pred in enumerate((dc, left[i], top[j], planar)):
                sse[k] += (v - pred) ** 2
    return min(sse) + lam * (32.0 + (w * h) / 16.0)


def test_intra_cost_constant_neighbors():
    p = LumaPlane(np.full((32, 32), 77, np.uint8))
    cfg = SearchConfig()
    r = Region(p, 8, 8, 16, 8)
    assert intra_cost(r, cfg) == cfg.lam * bit_proxy(16, 8)


def test_intra_cost_border_default_reference():
    p = LumaPlane(np.full((16, 16), 128, np.uint8))
    cfg = SearchConfig()
    assert intra_cost(Region(p, 0, 0, 16, 16), cfg) == cfg.lam * bit_proxy(16, 16)


def test_intra_cost_checkerboard_matches_oracle():
    a = np.full((12, 12), 90, np.uint8)
    a[4:8, 4:8] = np.array([[0, 255, 0, 255],
                            [255, 0, 255, 0],
                            [0, 255, 0, 255],
                            [255, 0, 255, 0]], np.uint8)
    p = LumaPlane(a)
    cfg = SearchConfig()
    got = intra_cost(Region(p, 4, 4, 4, 4), cfg)
    want = oracle_intra_cost(p, 4, 4, 4, 4, cfg.lam)
    assert got == pytest.approx(want, rel=1e-12)


def test_intra_cost_random_blocks_match_oracle(rng):
    p = rand_plane(rng, 48, 48)
    cfg = SearchConfig(qp=27)
    for _ in range(100):
        w = int(rng.integers(1, 17))
        h = int(rng.integers(1, 17))
        x = int(rng.integers(0, 49 - w))
        y = int(rng.integers(0, 49 - h))
        got = intra_cost(Region(p, x, y, w, h), cfg)
        want = oracle_intra_cost(p, x, y, w, h, cfg.lam)
        assert got == pytest.approx(want, rel=1e-12)


# --- search oracle -------------------------------------------------------------

def oracle_legal(w, h, depth, cfg):
    modes = [M.NOS]
    if w == h and w > cfg.min_cu and depth == 0 and w % 2 == 0:
        modes.append(M.QTS)
    if depth < cfg.max_mtt_depth:
        if h % 2 == 0 and h // 2 >= cfg.min_cu:
            modes.append(M.BHS)
        if w % 2 == 0 and w // 2 >= cfg.min_cu:
            modes.append(M.BVS)
        if h >= cfg.min_tt_size and h % 4 == 0 and h // 4 >= cfg.min_cu:
            modes.append(M.THS)
        if w >= cfg.min_tt_size and w % 4 == 0 and w // 4 >= cfg.min_cu:
            modes.append(M.TVS)
    return modes


def oracle_children(x, y, w, h, mode):
    if mode == M.QTS:
        hw, hh = w // 2, h // 2
        return [(x, y, hw, hh), (x + hw, y, hw, hh), (x, y + hh, hw, hh), (x + hw, y + hh, hw, hh)]
    if mode == M.BHS:
        return [(x, y, w, h // 2), (x, y + h // 2, w, h // 2)]
    if mode == M.BVS:
        return [(x, y, w // 2, h), (x + w // 2, y, w // 2, h)]
    if mode == M.THS:
        q = h // 4
        return [(x, y, w, q), (x, y + q, w, 2 * q), (x, y + 3 * q, w, q)]
    q = w // 4
    return [(x, y, q, h), (x + q, y, 2 * q, h), (x + 3 * q, y, q, h)]


def oracle_search(plane, x, y, w, h, depth, cfg):
    """Unmemoized exhaustive recursion; returns (best_cost, best_mode)."""
    best_cost = oracle_intra_cost(plane, x, y, w, h, cfg.lam)
    best_mode = M.NOS
    for mode in oracle_legal(w, h, depth, cfg):
        if mode == M.NOS:
            continue
        nd = 0 if mode == M.QTS else depth + 1
        cost = 0.0
        for cx, cy, cw, ch in oracle_children(x, y, w, h, mode):
            cost = cost + oracle_search(plane, cx, cy, cw, ch, nd, cfg)[0]
        cost = cost + cfg.lam * SPLIT_BIT_PROXY
        if cost < best_cost:
            best_cost, best_mode = cost, mode
    return best_cost, best_mode


def test_search_matches_bruteforce_oracle(rng):
    cfg = SearchConfig(ctu_size=16, max_mtt_depth=2)
    for _ in range(12):
        a = rng.integers(0, 256, (16, 16), np.uint8)
        a[: rng.integers(0, 16), : rng.integers(0, 16)] //= int(rng.integers(1, 5))
        p = LumaPlane(a)
        root, st = search(Region(p, 0, 0, 16, 16), 0, cfg)
        want_cost, want_mode = oracle_search(p, 0, 0, 16, 16, 0, cfg)
        assert root.cost == pytest.approx(want_cost, rel=1e-12)
        assert root.chosen == want_mode


def test_two_tone_edge_agrees_with_oracle():
    # a block-constant horizontal edge is exactly reproduced by the
    # left-copy predictor everywhere except the first column strip, so the
    # best tree isolates that strip with vertical cuts
    a = np.full((32, 32), 128, np.uint8)
    a[16:] = 136
    p = LumaPlane(a)
    cfg = SearchConfig(ctu_size=32, max_mtt_depth=2)
    root, _ = search(Region(p, 0, 0, 32, 32), 0, cfg)
    want_cost, want_mode = oracle_search(p, 0, 0, 32, 32, 0, cfg)
    assert root.cost == pytest.approx(want_cost, rel=1e-12)
    assert root.chosen == want_mode
    assert want_mode in (M.BVS, M.TVS)


def test_striped_band_edge_splits_horizontally():
    # amplitude edge at mid-height over vertical stripes: row-copy
    # prediction breaks at the boundary only, and the cheapest tree cuts
    # horizontally at the root
    s = ((np.arange(32) // 2) % 2) - 0.5
    a = np.empty((32, 32))
    a[:16] = 128.0 + 10.0 * s[None, :]
    a[16:] = 128.0 + 30.0 * s[None, :]
    p = LumaPlane(a.astype(np.uint8))
    cfg = SearchConfig(ctu_size=32, max_mtt_depth=2)
    root, _ = search(Region(p, 0, 0, 32, 32), 0, cfg)
    want_cost, want_mode = oracle_search(p, 0, 0, 32, 32, 0, cfg)
    assert root.cost == pytest.approx(want_cost, rel=1e-12)
    assert root.chosen == want_mode
    assert root.chosen in (M.BHS, M.THS)


# --- tree invariants ------------------------------------------------------------

def walk(node):
    yield node
    for c in node.children:
        yield from walk(c)


def test_constant_ctu_single_leaf():
    p = LumaPlane(np.full((64, 64), 128, np.uint8))
    for fast in (False, True):
        cfg = SearchConfig(fast_enabled=fast)
        root, st = search(Region(p, 0, 0, 64, 64), 0, cfg)
        assert root.chosen == M.NOS
        assert root.children == ()
        assert st.leaf_count == 1


def test_leaf_tiling_and_cost_additivity(rng):
    p = rand_plane(rng, 64, 64)
    for fast in (False, True):
        cfg = SearchConfig(fast_enabled=fast)
        root, st = search(Region(p, 0, 0, 64, 64), 0, cfg)
        mask = np.zeros((64, 64), np.int32)
        for n in walk(root):
            if n.chosen == M.NOS:
                r = n.region
                mask[r.y : r.y + r.h, r.x : r.x + r.w] += 1
            else:
                total = 0.0
                for c in n.children:
                    total = total + c.cost
                assert n.cost == total + cfg.lam * SPLIT_BIT_PROXY
                assert M.NOS in n.evaluated_modes
                assert not (n.evaluated_modes & n.skipped_modes)
        assert (mask == 1).all()
        assert count_leaves(root) == st.leaf_count


def test_fast_is_subset_of_baseline(rng):
    for seed in range(4):
        r = np.random.default_rng(seed)
        p = rand_plane(r, 64, 64)
        base_cfg = SearchConfig(qp=30)
        fast_cfg = SearchConfig(qp=30, fast_enabled=True)
        broot, bst = search(Region(p, 0, 0, 64, 64), 0, base_cfg)
        froot, fst = search(Region(p, 0, 0, 64, 64), 0, fast_cfg)
        assert fst.nodes_visited <= bst.nodes_visited
        assert fst.total_cost >= bst.total_cost
        assert bst.nodes_visited >= bst.leaf_count >= 1


def test_search_deterministic(rng):
    from qtmtprune.partition_search import node_to_dict

    p = rand_plane(rng, 64, 64)
    cfg = SearchConfig(fast_enabled=True)
    r1, s1 = search(Region(p, 0, 0, 64, 64), 0, cfg)
    r2, s2 = search(Region(p, 0, 0, 64, 64), 0, cfg)
    assert node_to_dict(r1) == node_to_dict(r2)
    assert s1.nodes_visited == s2.nodes_visited
    assert s1.total_cost == s2.total_cost
    assert s1.fingerprint == s2.fingerprint


# --- run comparison --------------------------------------------------------------

def _stats(nodes, cost, fp="f", wall=1.0):
    return SearchStats(nodes_visited=nodes, leaf_count=1, total_cost=cost,
                       modes_skipped_by_flag=0, wall_time=wall, fingerprint=fp)


def test_compare_runs_arithmetic():
    rep = compare_runs(_stats(1000, 5000.0), _stats(600, 5100.0, wall=0.5))
    assert rep["node_reduction_pct"] == pytest.approx(40.0)
    assert rep["cost_inflation_pct"] == pytest.approx(2.0)
    assert rep["wall_time_reduction_pct"] == pytest.approx(50.0)
    same = compare_runs(_stats(10, 7.0), _stats(10, 7.0))
    assert same["node_reduction_pct"] == 0.0
    assert same["cost_inflation_pct"] == 0.0


def test_compare_runs_rejects_mismatch():
    with pytest.raises(ValueError):
        compare_runs(_stats(10, 7.0, fp="a"), _stats(10, 7.0, fp="b"))


def test_fingerprint_separates_inputs(rng):
    p1 = rand_plane(rng, 64, 64)
    p2 = rand_plane(rng, 64, 64)
    cfg = SearchConfig()
    _, s1 = search(Region(p1, 0, 0, 64, 64), 0, cfg)
    _, s2 = search(Region(p2, 0, 0, 64, 64), 0, cfg)
    _, s1f = search(Region(p1, 0, 0, 64, 64), 0, SearchConfig(fast_enabled=True))
    assert s1.fingerprint != s2.fingerprint
    assert s1.fingerprint == s1f.fingerprint  # fast flag excluded
