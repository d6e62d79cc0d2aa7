"""Raw frame loading (YUV 4:2:0, binary PGM) and rectangular block geometry."""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass

import numpy as np


class SplitMode(enum.IntEnum):
    """Partition modes. Integer value doubles as the cost tie-break rank."""

    NOS = 0  # no split (leaf)
    QTS = 1  # quadtree split into 4 quadrants
    BHS = 2  # binary horizontal split (two w x h/2 halves)
    BVS = 3  # binary vertical split (two w/2 x h halves)
    THS = 4  # ternary horizontal split (h/4, h/2, h/4 bands)
    TVS = 5  # ternary vertical split (w/4, w/2, w/4 bands)


class LumaPlane:
    """One 8-bit grayscale frame. Pixel array is immutable after construction."""

    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.ascontiguousarray(data, dtype=np.uint8)
        if arr.ndim != 2:
            raise ValueError(f"plane must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"plane dimensions must be positive, got {arr.shape}")
        arr.setflags(write=False)
        self.data = arr

    @classmethod
    def from_samples(cls, width: int, height: int, samples) -> "LumaPlane":
        """Build a plane from a flat row-major sample sequence."""
        if width <= 0 or height <= 0:
            raise ValueError(f"invalid dimensions {width}x{height}")
        arr = np.asarray(samples, dtype=np.uint8)
        if arr.size != width * height:
            raise ValueError(f"expected {width * height} samples, got {arr.size}")
        return cls(arr.reshape(height, width))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def __repr__(self):
        return f"LumaPlane({self.width}x{self.height})"


@dataclass(frozen=True)
class Region:
    """Rectangular pixel block inside a plane. x,y is the top-left corner."""

    plane: LumaPlane
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"region size must be positive, got {self.w}x{self.h}")
        if self.x < 0 or self.y < 0:
            raise ValueError(f"region origin must be non-negative, got ({self.x},{self.y})")
        if self.x + self.w > self.plane.width or self.y + self.h > self.plane.height:
            raise ValueError(
                f"region ({self.x},{self.y},{self.w},{self.h}) exceeds plane "
                f"{self.plane.width}x{self.plane.height}"
            )

    @property
    def area(self) -> int:
        return self.w * self.h

    def pixels(self) -> np.ndarray:
        """Read-only uint8 view of the block."""
        return self.plane.data[self.y : self.y + self.h, self.x : self.x + self.w]

    def __repr__(self):
        return f"Region(x={self.x}, y={self.y}, w={self.w}, h={self.h})"


def load_yuv420(path: str, width: int, height: int, max_frames: int | None = None) -> list[LumaPlane]:
    """Load luma planes from a raw planar YUV 4:2:0 file. Chroma is skipped.

    Without max_frames the file size must be an exact multiple of the frame
    size; with max_frames the file must hold at least that many frames.
    """
    if width <= 0 or height <= 0:
        raise ValueError(f"invalid frame dimensions {width}x{height}")
    luma_size = width * height
    if luma_size % 2 != 0:
        raise ValueError(f"4:2:0 needs an even luma sample count, got {width}x{height}")
    frame_size = luma_size * 3 // 2
    size = os.path.getsize(path)
    if max_frames is None:
        if size % frame_size != 0:
            raise ValueError(
                f"truncated file: {size} bytes is not a multiple of frame size {frame_size}"
            )
        n_frames = size // frame_size
    else:
        if max_frames <= 0:
            raise ValueError(f"max_frames must be positive, got {max_frames}")
        if size < max_frames * frame_size:
            raise ValueError(
                f"truncated file: need {max_frames * frame_size} bytes for "
                f"{max_frames} frame(s), file has {size}"
            )
        n_frames = max_frames
    planes = []
    with open(path, "rb") as f:
        for _ in range(n_frames):
            raw = f.read(frame_size)
            luma = np.frombuffer(raw, dtype=np.uint8, count=luma_size)
            planes.append(LumaPlane(luma.reshape(height, width)))
    return planes


def _read_pgm_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    # skip whitespace and '#' comments, then read one token
    n = len(buf)
    while pos < n:
        c = buf[pos : pos + 1]
        if c == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise ValueError("malformed PGM header: unexpected end of file")
    return buf[start:pos], pos


def load_pgm(path: str) -> LumaPlane:
    """Load a binary (P5) PGM file with maxval <= 255."""
    with open(path, "rb") as f:
        buf = f.read()
    magic, pos = _read_pgm_token(buf, 0)
    if magic != b"P5":
        raise ValueError(f"unsupported PGM magic {magic!r}, only binary P5 is handled")
    fields = []
    for _ in range(3):
        tok, pos = _read_pgm_token(buf, pos)
        try:
            fields.append(int(tok))
        except ValueError:
            raise ValueError(f"malformed PGM header field {tok!r}") from None
    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise ValueError(f"invalid PGM dimensions {width}x{height}")
    if not 0 < maxval <= 255:
        raise ValueError(f"unsupported PGM maxval {maxval}, need 1..255")
    pos += 1  # single whitespace after maxval
    payload = buf[pos : pos + width * height]
    if len(payload) < width * height:
        raise ValueError(
            f"truncated PGM payload: expected {width * height} bytes, got {len(payload)}"
        )
    arr = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return LumaPlane(arr)


def write_pgm(plane: LumaPlane, path: str) -> None:
    """Write a plane as binary (P5) PGM, maxval 255."""
    with open(path, "wb") as f:
        f.write(f"P5\n{plane.width} {plane.height}\n255\n".encode("ascii"))
        f.write(plane.data.tobytes())


def split_region(region: Region, mode: SplitMode) -> list[Region]:
    """Child blocks of a split, top-to-bottom for horizontal modes and
    left-to-right for vertical modes (quad splits in raster order)."""
    p, x, y, w, h = region.plane, region.x, region.y, region.w, region.h
    if mode == SplitMode.NOS:
        raise ValueError("NOS does not produce children")
    if mode == SplitMode.QTS:
        if w % 2 or h % 2:
            raise ValueError(f"cannot quad-split {w}x{h}: odd dimension")
        hw, hh = w // 2, h // 2
        return [
            Region(p, x, y, hw, hh),
            Region(p, x + hw, y, hw, hh),
            Region(p, x, y + hh, hw, hh),
            Region(p, x + hw, y + hh, hw, hh),
        ]
    if mode == SplitMode.BHS:
        if h % 2:
            raise ValueError(f"cannot halve height {h}")
        hh = h // 2
        return [Region(p, x, y, w, hh), Region(p, x, y + hh, w, hh)]
    if mode == SplitMode.BVS:
        if w % 2:
            raise ValueError(f"cannot halve width {w}")
        hw = w // 2
        return [Region(p, x, y, hw, h), Region(p, x + hw, y, hw, h)]
    if mode == SplitMode.THS:
        if h % 4:
            raise ValueError(f"height {h} not divisible by 4 for ternary split")
        q = h // 4
        return [
            Region(p, x, y, w, q),
            Region(p, x, y + q, w, 2 * q),
            Region(p, x, y + 3 * q, w, q),
        ]
    if mode == SplitMode.TVS:
        if w % 4:
            raise ValueError(f"width {w} not divisible by 4 for ternary split")
        q = w // 4
        return [
            Region(p, x, y, q, h),
            Region(p, x + q, y, 2 * q, h),
            Region(p, x + 3 * q, y, q, h),
        ]
    raise ValueError(f"unknown split mode {mode!r}")
