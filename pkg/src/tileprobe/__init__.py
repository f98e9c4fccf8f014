"""tileprobe: in-situ adaptive tile index for 2D window aggregates over raw
CSV files, answering exactly or within a user-specified relative error bound."""

from .approx_engine import (
    ApproxAnswer,
    ConfidenceInterval,
    ScoreParams,
    approximate_value,
    error_bound,
    evaluate_approx,
    query_ci,
    tile_ci,
    tile_score,
)
from .exact_engine import AggregateRequest, ExactAnswer, evaluate_exact
from .ingest import DatasetDescriptor, ObjectEntry, RowReader, ScanResult, scan_init
from .tile_index import (
    AggStats,
    IndexConfig,
    Rect,
    Tile,
    TileIndex,
    TilePartition,
    audit,
    initialize,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateRequest",
    "AggStats",
    "ApproxAnswer",
    "ConfidenceInterval",
    "DatasetDescriptor",
    "ExactAnswer",
    "IndexConfig",
    "ObjectEntry",
    "Rect",
    "RowReader",
    "ScanResult",
    "ScoreParams",
    "Tile",
    "TileIndex",
    "TilePartition",
    "approximate_value",
    "audit",
    "error_bound",
    "evaluate_approx",
    "evaluate_exact",
    "initialize",
    "query_ci",
    "scan_init",
    "tile_ci",
    "tile_score",
    "__version__",
]
