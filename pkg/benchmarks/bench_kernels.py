"""Timing comparison of the compiled and pure-numpy kernel backends.

Both backends are exact integer arithmetic and must agree bit for bit; this
script checks that while measuring throughput. The package picks the
compiled backend automatically when built; set QTMTPRUNE_PURE_PY=1 to force
the fallback at import time.

Usage: python3 benchmarks/bench_kernels.py [--size 1024] [--blocks 4096] [--repeats 5]
"""

import argparse
import time

import numpy as np

from qtmtprune import _kernels_py

try:
    from qtmtprune import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=1024, help="frame edge length")
    ap.add_argument("--blocks", type=int, default=4096, help="prediction batch size")
    ap.add_argument("--repeats", type=int, default=5, help="timing repeats (min kept)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if _kernels is None:
        raise SystemExit("compiled backend not built; run pip install -e . first")

    rng = np.random.default_rng(args.seed)
    img = rng.integers(0, 256, (args.size, args.size), np.uint8)
    ws = 2 ** rng.integers(2, 7, args.blocks)  # 4..64
    hs = 2 ** rng.integers(2, 7, args.blocks)
    xs = rng.integers(0, args.size + 1 - ws)
    ys = rng.integers(0, args.size + 1 - hs)
    xs, ys, ws, hs = (a.astype(np.int64) for a in (xs, ys, ws, hs))

    rows = []
    for name, fn_c, fn_p in (
        (
            f"sobel_abs_maps {args.size}x{args.size}",
            lambda: _kernels.sobel_abs_maps(img),
            lambda: _kernels_py.sobel_abs_maps(img),
        ),
        (
            f"pred_sse_batch {args.blocks} blocks",
            lambda: _kernels.pred_sse_batch(img, xs, ys, ws, hs),
            lambda: _kernels_py.pred_sse_batch(img, xs, ys, ws, hs),
        ),
    ):
        if not np.array_equal(fn_c(), fn_p()):
            raise SystemExit(f"backend mismatch in {name}")
        tc = best_of(fn_c, args.repeats)
        tp = best_of(fn_p, args.repeats)
        rows.append((name, tc, tp, tp / tc))

    w = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{w}}  {'compiled':>10}  {'python':>10}  {'speedup':>8}")
    for name, tc, tp, sp in rows:
        print(f"{name:<{w}}  {tc * 1e3:>8.2f}ms  {tp * 1e3:>8.2f}ms  {sp:>7.1f}x")
    print("outputs bit-identical across backends")


if __name__ == "__main__":
    main()
