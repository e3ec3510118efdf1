"""Metrics, evaluation, model selection, the benchmark grid and plot data."""
from .benchmark import (
    FULL_GRID_MODELS,
    BenchmarkConfig,
    benchmark_matrix,
    cell_seed,
    errors_to_csv,
    parse_report_csv,
    primary_reports,
    reports_to_csv,
    reports_to_text,
)
from .evaluation import SCALES, EvalReport, evaluate
from .metrics import SCORERS, mae, r2, rmse
from .plots import emit_plot_data, histogram, monthly_totals, read_plot_data
from .search import CVResult, GridResult, GridSpec, cross_validate, grid_search

__all__ = [
    "FULL_GRID_MODELS", "SCALES", "SCORERS", "BenchmarkConfig", "CVResult", "EvalReport", "GridResult",
    "GridSpec", "benchmark_matrix", "cell_seed", "cross_validate", "emit_plot_data", "errors_to_csv",
    "evaluate", "grid_search", "histogram", "mae", "monthly_totals", "parse_report_csv",
    "primary_reports", "r2", "read_plot_data", "reports_to_csv", "reports_to_text", "rmse",
]
