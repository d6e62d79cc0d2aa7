"""QTMT block-partition search with cross-block-difference split pruning."""

from .cross_diff import (
    PRESETS,
    DiffFlags,
    SkipSet,
    Thresholds,
    all_skip_flags,
    bt_content_flags,
    bt_gradient_flag,
    bt_skip,
    combine_bt_flags,
    content_diff,
    ratio_m,
    tt_skip,
)
from .frame_io import (
    LumaPlane,
    Region,
    SplitMode,
    load_pgm,
    load_yuv420,
    split_region,
    write_pgm,
)
from .gradient import (
    DIRECTIONS,
    KERNELS,
    DirGradients,
    RegionTooSmallError,
    all_gradients,
    directional_gradient,
)
from .partition_search import (
    PartitionNode,
    SearchConfig,
    SearchStats,
    compare_runs,
    intra_cost,
    lambda_from_qp,
    legal_modes,
    search,
)
from .stats_report import (
    GradientStatsTable,
    RunReport,
    canonical_json,
    collect_gradient_stats,
    csv_to_report,
    report_to_csv,
    run_corpus,
)
from .synth import gen_corpus

__version__ = "0.1.0"

__all__ = [
    "DIRECTIONS",
    "KERNELS",
    "PRESETS",
    "DiffFlags",
    "DirGradients",
    "GradientStatsTable",
    "LumaPlane",
    "PartitionNode",
    "Region",
    "RegionTooSmallError",
    "RunReport",
    "SearchConfig",
    "SearchStats",
    "SkipSet",
    "SplitMode",
    "Thresholds",
    "all_gradients",
    "all_skip_flags",
    "bt_content_flags",
    "bt_gradient_flag",
    "bt_skip",
    "canonical_json",
    "collect_gradient_stats",
    "combine_bt_flags",
    "compare_runs",
    "content_diff",
    "csv_to_report",
    "directional_gradient",
    "gen_corpus",
    "intra_cost",
    "lambda_from_qp",
    "legal_modes",
    "load_pgm",
    "load_yuv420",
    "ratio_m",
    "report_to_csv",
    "run_corpus",
    "search",
    "split_region",
    "tt_skip",
    "write_pgm",
    "__version__",
]
