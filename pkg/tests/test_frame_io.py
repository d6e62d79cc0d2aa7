import numpy as np
import pytest

from qtmtprune import LumaPlane, Region, SplitMode, load_pgm, load_yuv420, split_region, write_pgm

from conftest import rand_plane


def test_plane_shape_and_props():
    p = LumaPlane(np.zeros((3, 5), np.uint8))
    assert p.width == 5 and p.height == 3
    with pytest.raises(ValueError):
        LumaPlane(np.zeros((0, 4), np.uint8))
    with pytest.raises(ValueError):
        LumaPlane(np.zeros(12, np.uint8))


def test_plane_from_samples():
    p = LumaPlane.from_samples(4, 2, range(8))
    assert p.data[1, 3] == 7
    with pytest.raises(ValueError):
        LumaPlane.from_samples(4, 2, range(7))
    with pytest.raises(ValueError):
        LumaPlane.from_samples(0, 2, [])


def test_plane_immutable():
    p = LumaPlane(np.zeros((4, 4), np.uint8))
    with pytest.raises(ValueError):
        p.data[0, 0] = 1


def test_region_bounds():
    p = LumaPlane(np.zeros((8, 8), np.uint8))
    r = Region(p, 2, 3, 4, 5)
    assert r.area == 20
    assert r.pixels().shape == (5, 4)
    with pytest.raises(ValueError):
        Region(p, 5, 0, 4, 4)  # x+w > width
    with pytest.raises(ValueError):
        Region(p, -1, 0, 4, 4)
    with pytest.raises(ValueError):
        Region(p, 0, 0, 0, 4)


def test_yuv420_two_frames(tmp_path):
    w = h = 16
    luma0 = np.arange(256, dtype=np.uint8).reshape(16, 16)
    luma1 = luma0[::-1].copy()
    path = tmp_path / "clip.yuv"
    with open(path, "wb") as f:
        for luma in (luma0, luma1):
            f.write(luma.tobytes())
            f.write(bytes(128 for _ in range(w * h // 2)))  # chroma, discarded
    assert path.stat().st_size == 768
    planes = load_yuv420(str(path), w, h)
    assert len(planes) == 2
    assert np.array_equal(planes[0].data, luma0)
    assert np.array_equal(planes[1].data, luma1)
    # max_frames reads a prefix
    assert len(load_yuv420(str(path), w, h, max_frames=1)) == 1
    with pytest.raises(ValueError):
        load_yuv420(str(path), w, h, max_frames=3)


def test_yuv420_truncated(tmp_path):
    path = tmp_path / "short.yuv"
    path.write_bytes(bytes(767))
    with pytest.raises(ValueError):
        load_yuv420(str(path), 16, 16)
    with pytest.raises(ValueError):
        load_yuv420(str(path), 16, 16, max_frames=2)


def test_yuv420_zero_file_and_bad_dims(tmp_path):
    path = tmp_path / "zero.yuv"
    path.write_bytes(bytes(96))  # one 8x8 frame
    planes = load_yuv420(str(path), 8, 8, max_frames=1)
    assert len(planes) == 1 and not planes[0].data.any()
    with pytest.raises(ValueError):
        load_yuv420(str(path), 0, 8)
    with pytest.raises(FileNotFoundError):
        load_yuv420(str(tmp_path / "missing.yuv"), 8, 8)


def test_pgm_constant(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_bytes(b"P5 4 2 255\n" + bytes([7] * 8))
    p = load_pgm(str(path))
    assert (p.width, p.height) == (4, 2)
    assert (p.data == 7).all()


def test_pgm_header_comment(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_bytes(b"P5\n# made by hand\n3 1\n255\n" + bytes([1, 2, 3]))
    assert load_pgm(str(path)).data.tolist() == [[1, 2, 3]]


def test_pgm_errors(tmp_path):
    bad_magic = tmp_path / "a.pgm"
    bad_magic.write_bytes(b"P6 2 2 255\n" + bytes(12))
    with pytest.raises(ValueError):
        load_pgm(str(bad_magic))
    deep = tmp_path / "b.pgm"
    deep.write_bytes(b"P5 3 3 65535\n" + bytes(18))
    with pytest.raises(ValueError):
        load_pgm(str(deep))
    short = tmp_path / "c.pgm"
    short.write_bytes(b"P5 4 4 255\n" + bytes(15))
    with pytest.raises(ValueError):
        load_pgm(str(short))


def test_pgm_round_trip(tmp_path, rng):
    p = rand_plane(rng, 37, 23)
    path = tmp_path / "r.pgm"
    write_pgm(p, str(path))
    back = load_pgm(str(path))
    assert np.array_equal(back.data, p.data)


def _geom(r):
    return (r.x, r.y, r.w, r.h)


def test_split_shapes():
    p = LumaPlane(np.zeros((16, 16), np.uint8))
    r = Region(p, 0, 0, 16, 16)
    assert [_geom(s) for s in split_region(r, SplitMode.BHS)] == [
        (0, 0, 16, 8), (0, 8, 16, 8)]
    assert [_geom(s) for s in split_region(r, SplitMode.BVS)] == [
        (0, 0, 8, 16), (8, 0, 8, 16)]
    assert [_geom(s) for s in split_region(r, SplitMode.THS)] == [
        (0, 0, 16, 4), (0, 4, 16, 8), (0, 12, 16, 4)]
    assert [_geom(s) for s in split_region(r, SplitMode.TVS)] == [
        (0, 0, 4, 16), (4, 0, 8, 16), (12, 0, 4, 16)]
    assert [_geom(s) for s in split_region(r, SplitMode.QTS)] == [
        (0, 0, 8, 8), (8, 0, 8, 8), (0, 8, 8, 8), (8, 8, 8, 8)]


def test_split_errors():
    p = LumaPlane(np.zeros((7, 6), np.uint8))
    with pytest.raises(ValueError):
        split_region(Region(p, 0, 0, 6, 7), SplitMode.BHS)  # odd height
    with pytest.raises(ValueError):
        split_region(Region(p, 0, 0, 5, 6), SplitMode.BVS)
    with pytest.raises(ValueError):
        split_region(Region(p, 0, 0, 6, 6), SplitMode.THS)  # 6 % 4 != 0
    with pytest.raises(ValueError):
        split_region(Region(p, 0, 0, 6, 6), SplitMode.TVS)
    with pytest.raises(ValueError):
        split_region(Region(p, 0, 0, 5, 6), SplitMode.QTS)
    with pytest.raises(ValueError):
        split_region(Region(p, 0, 0, 4, 4), SplitMode.NOS)


def test_split_tiling(rng):
    p = rand_plane(rng, 64, 64)
    for _ in range(60):
        w = int(rng.choice([4, 8, 12, 16, 32, 64]))
        h = int(rng.choice([4, 8, 12, 16, 32, 64]))
        x = int(rng.integers(0, 65 - w))
        y = int(rng.integers(0, 65 - h))
        r = Region(p, x, y, w, h)
        for mode in (SplitMode.QTS, SplitMode.BHS, SplitMode.BVS, SplitMode.THS, SplitMode.TVS):
            try:
                parts = split_region(r, mode)
            except ValueError:
                continue
            mask = np.zeros((64, 64), np.int32)
            for s in parts:
                mask[s.y : s.y + s.h, s.x : s.x + s.w] += 1
            inside = mask[y : y + h, x : x + w]
            assert (inside == 1).all()  # exact tiling, no overlap
            assert mask.sum() == r.area  # nothing outside
            assert sum(s.area for s in parts) == r.area


def test_split_is_pure(rng):
    p1 = rand_plane(rng, 16, 16)
    p2 = rand_plane(rng, 16, 16)
    a = split_region(Region(p1, 4, 0, 8, 12), SplitMode.THS)
    b = split_region(Region(p2, 4, 0, 8, 12), SplitMode.THS)
    assert [_geom(s) for s in a] == [_geom(s) for s in b]
