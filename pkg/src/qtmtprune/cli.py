"""Command-line front end.

Subcommands: `search` (partition trees from the recursive engine),
`compare` (baseline vs. pruned legs over a corpus), `stats` (gradient-ratio
table), `sweep` (threshold grid against a shared baseline).

Option resolution, lowest to highest precedence: built-in defaults, config
file (`--config`, `key = value` lines), environment (`QTMTPRUNE_<OPTION>`),
command-line flags. Exit codes: 0 success, 2 usage/config error, 3 input
file error, 4 internal failure.
"""

from __future__ import annotations

import argparse
import itertools
import os
import sys
import traceback

from .batch_search import ctu_origins
from .cross_diff import PRESETS, Thresholds
from .frame_io import Region, load_pgm, load_yuv420
from .partition_search import SearchConfig, node_to_dict, search
from .stats_report import (
    GradientStatsTable,
    build_compare_report,
    build_stats_report,
    build_sweep_report,
    canonical_json,
    report_to_csv,
    run_corpus,
    run_sweep_corpus,
)
from .synth import KINDS, gen_corpus

ENV_PREFIX = "QTMTPRUNE_"


class UsageError(Exception):
    """Bad flags/config; exit code 2."""


class InputError(Exception):
    """Unreadable or malformed input file; exit code 3."""


def _parse_bool(raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {raw!r}")


def _parse_intlist(raw: str) -> list[int]:
    return [int(t) for t in raw.split(",") if t.strip()]


def _parse_floatlist(raw: str) -> list[float]:
    return [float(t) for t in raw.split(",") if t.strip()]


def _parse_strlist(raw: str) -> list[str]:
    return [t.strip() for t in raw.split(",") if t.strip()]


# option name -> parser for config-file / environment values
_OPTION_PARSERS = {
    "input": _parse_strlist,
    "frames": int,
    "width": int,
    "height": int,
    "qp": _parse_intlist,
    "ctu": int,
    "min_cu": int,
    "max_mtt_depth": int,
    "min_tt_size": int,
    "preset": str,
    "t1": float,
    "t2": float,
    "t3": float,
    "out": str,
    "format": str,
    "seed": int,
    "threads": int,
    "timing": _parse_bool,
    "fast": _parse_bool,
    "gradient_stats": _parse_bool,
    "t1_list": _parse_floatlist,
    "t2_list": _parse_floatlist,
    "t3_list": _parse_floatlist,
}


def _defaults(command: str) -> dict:
    return {
        "input": ["synth:mixed"],
        "frames": 1 if command == "search" else 8,
        "width": 256,
        "height": 256,
        "qp": [32],
        "ctu": 64,
        "min_cu": 4,
        "max_mtt_depth": 3,
        "min_tt_size": 16,
        "preset": "vtm9",
        "t1": None,
        "t2": None,
        "t3": None,
        "out": None,
        "format": "json",
        "seed": 0,
        "threads": 1,
        "timing": False,
        "fast": False,
        "gradient_stats": command == "stats",
        "t1_list": None,
        "t2_list": None,
        "t3_list": None,
    }


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", action="append", default=None,
                   help="synth:mixed | synth:bands | file.pgm | file.yuv (repeatable)")
    p.add_argument("--frames", type=int, default=None, help="frames per synthetic/YUV input")
    p.add_argument("--width", type=int, default=None, help="luma width for synth/YUV inputs")
    p.add_argument("--height", type=int, default=None, help="luma height for synth/YUV inputs")
    p.add_argument("--qp", action="append", type=int, default=None,
                   help="quantization parameter (repeatable)")
    p.add_argument("--ctu", type=int, default=None, help="CTU size (power of two)")
    p.add_argument("--min-cu", dest="min_cu", type=int, default=None)
    p.add_argument("--max-mtt-depth", dest="max_mtt_depth", type=int, default=None)
    p.add_argument("--min-tt-size", dest="min_tt_size", type=int, default=None)
    p.add_argument("--preset", choices=sorted(PRESETS), default=None,
                   help="threshold preset")
    p.add_argument("--t1", type=float, default=None, help="override gradient-agreement threshold")
    p.add_argument("--t2", type=float, default=None, help="override content-difference threshold")
    p.add_argument("--t3", type=float, default=None, help="override ternary gradient threshold")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--seed", type=int, default=None, help="synthetic corpus seed")
    p.add_argument("--threads", type=int, default=None, help="worker processes for frame batches")
    p.add_argument("--config", default=None, help="config file with key = value lines")
    p.add_argument("--timing", action="store_true", default=None,
                   help="include wall-clock section (breaks byte-reproducibility)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qtmtprune",
        description="Block-partition search with gradient-based split pruning.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("search", help="emit partition trees for each CTU")
    _add_common(ps)
    ps.add_argument("--fast", action="store_true", default=None,
                    help="apply skip flags during the search")

    pc = sub.add_parser("compare", help="baseline vs. pruned search over a corpus")
    _add_common(pc)
    pc.add_argument("--gradient-stats", dest="gradient_stats", action="store_true",
                    default=None, help="also collect the gradient-ratio table")
    pc.add_argument("--no-gradient-stats", dest="gradient_stats", action="store_false",
                    default=None)

    pt = sub.add_parser("stats", help="gradient-ratio table by chosen mode")
    _add_common(pt)

    pw = sub.add_parser("sweep", help="threshold grid vs. a shared baseline")
    _add_common(pw)
    pw.add_argument("--t1-list", dest="t1_list", type=_parse_floatlist, default=None,
                    help="comma-separated t1 grid")
    pw.add_argument("--t2-list", dest="t2_list", type=_parse_floatlist, default=None)
    pw.add_argument("--t3-list", dest="t3_list", type=_parse_floatlist, default=None)
    return ap


def _read_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise UsageError(f"cannot read config file {path}: {e}") from None
    out = {}
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{ln}: expected key = value")
        key, val = line.split("=", 1)
        key = key.strip().replace("-", "_")
        if key not in _OPTION_PARSERS:
            raise UsageError(f"{path}:{ln}: unknown option {key!r}")
        out[key] = val.strip()
    return out


def resolve_options(args: argparse.Namespace) -> dict:
    """Merge defaults, config file, environment and flags (that order)."""
    opts = _defaults(args.command)
    config_path = args.config or os.environ.get(ENV_PREFIX + "CONFIG")
    layers: list[dict] = []
    if config_path:
        layers.append(_read_config_file(config_path))
    env_layer = {}
    for key in _OPTION_PARSERS:
        raw = os.environ.get(ENV_PREFIX + key.upper())
        if raw is not None:
            env_layer[key] = raw
    layers.append(env_layer)
    for layer in layers:
        for key, raw in layer.items():
            try:
                opts[key] = _OPTION_PARSERS[key](raw)
            except (ValueError, TypeError):
                raise UsageError(f"bad value for {key}: {raw!r}") from None
    for key in opts:
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val

    if opts["frames"] < 1:
        raise UsageError("--frames must be >= 1")
    if opts["threads"] < 1:
        raise UsageError("--threads must be >= 1")
    if not opts["qp"]:
        raise UsageError("at least one --qp required")
    if opts["preset"] not in PRESETS:
        raise UsageError(f"unknown preset {opts['preset']!r}")
    return opts


def _thresholds(opts: dict) -> Thresholds:
    base = PRESETS[opts["preset"]]
    try:
        return Thresholds(
            t1=base.t1 if opts["t1"] is None else opts["t1"],
            t2=base.t2 if opts["t2"] is None else opts["t2"],
            t3=base.t3 if opts["t3"] is None else opts["t3"],
        )
    except ValueError as e:
        raise UsageError(str(e)) from None


def _search_config(opts: dict, thr: Thresholds, fast: bool = False) -> SearchConfig:
    try:
        return SearchConfig(
            ctu_size=opts["ctu"],
            min_cu=opts["min_cu"],
            max_mtt_depth=opts["max_mtt_depth"],
            min_tt_size=opts["min_tt_size"],
            qp=opts["qp"][0],
            thresholds=thr,
            fast_enabled=fast,
        )
    except ValueError as e:
        raise UsageError(str(e)) from None


def _load_inputs(opts: dict):
    """Resolve --input names to (metadata list, frame lists)."""
    metas = []
    sequences = []
    for name in opts["input"]:
        if name.startswith("synth:"):
            kind = name.split(":", 1)[1]
            if kind not in KINDS:
                raise UsageError(f"unknown synthetic corpus {name!r} (kinds: {', '.join(KINDS)})")
            planes = gen_corpus(kind, opts["frames"], opts["width"], opts["height"], opts["seed"])
        elif name.endswith(".pgm"):
            try:
                planes = [load_pgm(name)]
            except (OSError, ValueError) as e:
                raise InputError(f"{name}: {e}") from None
        elif name.endswith(".yuv"):
            try:
                planes = load_yuv420(name, opts["width"], opts["height"], max_frames=opts["frames"])
            except (OSError, ValueError) as e:
                raise InputError(f"{name}: {e}") from None
        else:
            raise UsageError(
                f"cannot infer input type of {name!r} (use synth:*, *.pgm or *.yuv)"
            )
        metas.append(
            {
                "name": name,
                "frames": len(planes),
                "width": planes[0].width,
                "height": planes[0].height,
            }
        )
        sequences.append(planes)
    return metas, sequences


def _config_echo(opts: dict, thr: Thresholds) -> dict:
    """Engine-relevant options for the report; excludes execution details
    (threads, output format) so reruns compare byte-for-byte."""
    return {
        "ctu_size": opts["ctu"],
        "min_cu": opts["min_cu"],
        "max_mtt_depth": opts["max_mtt_depth"],
        "min_tt_size": opts["min_tt_size"],
        "preset": opts["preset"],
        "t1": thr.t1,
        "t2": thr.t2,
        "t3": thr.t3,
        "qps": list(opts["qp"]),
        "seed": opts["seed"],
    }


def _emit(opts: dict, doc: dict) -> None:
    text = canonical_json(doc) if opts["format"] == "json" else report_to_csv(doc)
    if opts["out"]:
        with open(opts["out"], "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_search(opts: dict) -> int:
    thr = _thresholds(opts)
    cfg = _search_config(opts, thr, fast=bool(opts["fast"]))
    metas, sequences = _load_inputs(opts)
    results = []
    for meta, planes in zip(metas, sequences):
        per_qp = []
        for qp in opts["qp"]:
            qcfg = SearchConfig(
                ctu_size=cfg.ctu_size, min_cu=cfg.min_cu,
                max_mtt_depth=cfg.max_mtt_depth, min_tt_size=cfg.min_tt_size,
                qp=qp, thresholds=thr, fast_enabled=cfg.fast_enabled,
            )
            frames_out = []
            for fi, plane in enumerate(planes):
                try:
                    origins = ctu_origins(plane.width, plane.height, cfg.ctu_size)
                except ValueError as e:
                    raise UsageError(f"{meta['name']}: {e} (set --ctu)") from None
                ctus = []
                for x, y in origins:
                    root, st = search(
                        Region(plane, int(x), int(y), cfg.ctu_size, cfg.ctu_size), 0, qcfg
                    )
                    stats = {
                        "nodes_visited": st.nodes_visited,
                        "leaf_count": st.leaf_count,
                        "total_cost": st.total_cost,
                        "modes_skipped_by_flag": st.modes_skipped_by_flag,
                        "fingerprint": st.fingerprint,
                    }
                    if opts["timing"]:
                        stats["wall_time"] = st.wall_time
                    ctus.append({"x": int(x), "y": int(y), "tree": node_to_dict(root), "stats": stats})
                frames_out.append({"index": fi, "ctus": ctus})
            per_qp.append({"qp": qp, "frames": frames_out})
        results.append({"input": meta["name"], "per_qp": per_qp})
    doc = {
        "command": "search",
        "config": {**_config_echo(opts, thr), "fast": bool(opts["fast"])},
        "inputs": metas,
        "results": results,
    }
    _emit(opts, doc)
    return 0


def _run_compare_like(opts: dict, collect_stats: bool, run_fast: bool):
    thr = _thresholds(opts)
    cfg = _search_config(opts, thr, fast=run_fast)
    metas, sequences = _load_inputs(opts)
    base_by_input = []
    fast_by_input = []
    table = GradientStatsTable() if collect_stats else None
    for planes in sequences:
        ob, of, tb = run_corpus(
            planes, cfg, opts["qp"],
            run_baseline=True, run_fast=run_fast,
            collect_stats=collect_stats, threads=opts["threads"],
        )
        base_by_input.append(ob)
        fast_by_input.append(of)
        if collect_stats:
            table.merge(tb)
    return thr, metas, base_by_input, fast_by_input, table


def _cmd_compare(opts: dict) -> int:
    thr, metas, base, fast, table = _run_compare_like(
        opts, collect_stats=bool(opts["gradient_stats"]), run_fast=True
    )
    report = build_compare_report(
        _config_echo(opts, thr), metas, opts["qp"], base, fast,
        table=table, timing=bool(opts["timing"]),
    )
    _emit(opts, report.to_dict())
    return 0


def _cmd_stats(opts: dict) -> int:
    thr, metas, base, _, table = _run_compare_like(opts, collect_stats=True, run_fast=False)
    report = build_stats_report(
        _config_echo(opts, thr), metas, opts["qp"], base, table,
        timing=bool(opts["timing"]),
    )
    _emit(opts, report.to_dict())
    return 0


def _cmd_sweep(opts: dict) -> int:
    thr = _thresholds(opts)
    cfg = _search_config(opts, thr)
    metas, sequences = _load_inputs(opts)
    t1s = opts["t1_list"] or [thr.t1]
    t2s = opts["t2_list"] or [thr.t2]
    t3s = opts["t3_list"] or [thr.t3]
    try:
        points = [Thresholds(a, b, c) for a, b, c in itertools.product(t1s, t2s, t3s)]
    except ValueError as e:
        raise UsageError(str(e)) from None
    base_by_input = []
    sweep_by_input = []
    for planes in sequences:
        ob, op = run_sweep_corpus(planes, cfg, opts["qp"], points, threads=opts["threads"])
        base_by_input.append(ob)
        sweep_by_input.append(op)
    report = build_sweep_report(
        _config_echo(opts, thr), metas, opts["qp"], points,
        base_by_input, sweep_by_input, timing=bool(opts["timing"]),
    )
    _emit(opts, report.to_dict())
    return 0


_COMMANDS = {
    "search": _cmd_search,
    "compare": _cmd_compare,
    "stats": _cmd_stats,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        opts = resolve_options(args)
        return _COMMANDS[args.command](opts)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except InputError as e:
        print(f"input error: {e}", file=sys.stderr)
        return 3
    except BrokenPipeError:
        return 0
    except Exception:
        traceback.print_exc()
        return 4


if __name__ == "__main__":
    sys.exit(main())
