"""Seeded synthetic corpora.

Two families: "mixed" scatters varied patches (flats, ramps, edges, stripes,
noise) to exercise all six partition modes; "bands" tiles the CTU grid with
stripe cells whose amplitude changes only at half- and third-offsets of the
cell -- exactly the separators the split modes cut at -- so each chosen mode
lines up with a distinctive cross-separator gradient ratio.
"""

from __future__ import annotations

import numpy as np

from .frame_io import LumaPlane

KINDS = ("mixed", "bands")


def _rng(kind: str, seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([KINDS.index(kind), seed, index])


def _fill_pattern(rng, h: int, w: int, kind: int) -> np.ndarray:
    lo, hi = sorted(rng.integers(0, 256, size=2).tolist())
    if hi - lo < 40:
        hi = min(255, lo + 40 + int(rng.integers(0, 60)))
    if kind == 0:  # flat
        return np.full((h, w), lo, np.uint8)
    if kind == 1:  # horizontal edge (top/bottom tones)
        e = int(rng.integers(1, h)) if h > 1 else 0
        out = np.full((h, w), lo, np.uint8)
        out[e:] = hi
        return out
    if kind == 2:  # vertical edge
        e = int(rng.integers(1, w)) if w > 1 else 0
        out = np.full((h, w), lo, np.uint8)
        out[:, e:] = hi
        return out
    if kind == 3:  # horizontal ramp
        return np.broadcast_to(
            np.linspace(lo, hi, w).astype(np.uint8)[None, :], (h, w)
        ).copy()
    if kind == 4:  # vertical ramp
        return np.broadcast_to(
            np.linspace(lo, hi, h).astype(np.uint8)[:, None], (h, w)
        ).copy()
    if kind == 5:  # horizontal stripe (band across the middle)
        out = np.full((h, w), lo, np.uint8)
        t = max(1, h // 4)
        c = h // 2 + int(rng.integers(-h // 8, h // 8 + 1)) if h >= 8 else h // 2
        out[max(0, c - t // 2) : min(h, c + (t + 1) // 2)] = hi
        return out
    if kind == 6:  # vertical stripe
        out = np.full((h, w), lo, np.uint8)
        t = max(1, w // 4)
        c = w // 2 + int(rng.integers(-w // 8, w // 8 + 1)) if w >= 8 else w // 2
        out[:, max(0, c - t // 2) : min(w, c + (t + 1) // 2)] = hi
        return out
    if kind == 7:  # gaussian noise
        sigma = float(rng.integers(6, 28))
        base = float(rng.integers(60, 200))
        return np.clip(
            rng.normal(base, sigma, (h, w)), 0, 255
        ).astype(np.uint8)
    # checkerboard
    cell = int(rng.choice([2, 4, 8]))
    yy, xx = np.mgrid[0:h, 0:w]
    return np.where(((yy // cell + xx // cell) % 2).astype(bool), hi, lo).astype(np.uint8)


def gen_frame_mixed(width: int, height: int, seed: int, index: int) -> np.ndarray:
    rng = _rng("mixed", seed, index)
    base = int(rng.integers(40, 216))
    img = np.full((height, width), base, np.uint8)
    n_patch = int(rng.integers(8, 15))
    for _ in range(n_patch):
        w = int(rng.integers(12, min(144, width)))
        h = int(rng.integers(12, min(144, height)))
        x = int(rng.integers(0, width - w + 1))
        y = int(rng.integers(0, height - h + 1))
        img[y : y + h, x : x + w] = _fill_pattern(rng, h, w, int(rng.integers(0, 9)))
    if rng.random() < 0.5:
        noise = rng.normal(0.0, 2.0, img.shape)
        img = np.clip(img.astype(np.float64) + noise, 0, 255).astype(np.uint8)
    return img


def gen_frame_bands(width: int, height: int, seed: int, index: int) -> np.ndarray:
    """Stripe cells whose amplitude shifts only at split-separator offsets.

    Even-index frames use vertical period-4 stripes (every column constant),
    so a one-row reference predicts any interior block exactly; the stripe
    amplitude steps at rows 16/48 of each 64-cell, breaks only a horizontal
    separator can isolate. Odd-index frames are the transposed world. Cells
    on the leading frame edge fade in from the flat tone (keeps the border
    reference exact); interior cells carry a 1:2:1 amplitude band (70%) or
    stay uniformly quiet.
    """
    rng = _rng("bands", seed, index)
    horiz = index % 2 == 0  # amplitude varies by row; else transposed
    cell = 64
    img = np.full((height, width), 128.0)
    for cy in range(0, height - cell + 1, cell):
        for cx in range(0, width - cell + 1, cell):
            amp_hi = 2.0 * rng.integers(14, 23)
            first = (cy == 0) if horiz else (cx == 0)
            r = rng.random()
            amp = np.full(cell, 10.0)
            if first:
                amp[:16] = 0.0
                if r < 0.7:
                    amp[16:48] = amp_hi
                else:
                    amp[:] = 0.0
            elif r < 0.7:
                amp[16:48] = amp_hi
            if horiz:
                s = ((np.arange(cx, cx + cell) // 2) % 2) - 0.5
                img[cy : cy + cell, cx : cx + cell] = 128.0 + amp[:, None] * s[None, :]
            else:
                s = ((np.arange(cy, cy + cell) // 2) % 2) - 0.5
                img[cy : cy + cell, cx : cx + cell] = 128.0 + amp[None, :] * s[:, None]
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def gen_corpus(kind: str, frames: int, width: int, height: int, seed: int) -> list[LumaPlane]:
    """Deterministic frame list; frame i depends only on (kind, seed, i)."""
    if kind not in KINDS:
        raise ValueError(f"unknown synthetic corpus kind {kind!r}, have {KINDS}")
    if frames < 1:
        raise ValueError("corpus needs at least one frame")
    gen = gen_frame_mixed if kind == "mixed" else gen_frame_bands
    return [LumaPlane(gen(width, height, seed, i)) for i in range(frames)]
