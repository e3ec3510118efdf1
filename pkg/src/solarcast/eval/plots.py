"""Plot-data emission. Only the numbers are written; rendering is left to the reader's tool."""
from __future__ import annotations

from pathlib import Path
from typing import Optional

import numpy as np

from .._io import atomic_write_text, fmt
from ..core import GENERATION, SupervisedDataset, TimeTable
from ..ingest import format_timestamp
from ..transform import fit_transformer

PLOT_HEADER = "series_name,x,y"


def monthly_totals(table: TimeTable) -> tuple[list[str], np.ndarray]:
    """Total generation per calendar month, labelled ``YYYY-MM``, in time order."""
    gen = np.where(table.missing[GENERATION], 0.0, table.columns[GENERATION])
    months = table.timestamps.astype("datetime64[M]")
    uniq, inv = np.unique(months, return_inverse=True)
    totals = np.bincount(inv, weights=gen, minlength=len(uniq))
    return [str(m) for m in uniq], totals


def histogram(values, bins: int = 40) -> tuple[np.ndarray, np.ndarray]:
    """Bin centres and counts over ``[min, max]`` split into equal-width bins."""
    values = np.asarray(values, dtype=float)
    counts, edges = np.histogram(values, bins=bins)
    return 0.5 * (edges[:-1] + edges[1:]), counts.astype(float)


def _rows(series: str, xs, ys) -> list[str]:
    return [f"{series},{x if isinstance(x, str) else fmt(x)},{fmt(y)}" for x, y in zip(xs, ys)]


def _write(path: Path, rows: list[str]) -> None:
    atomic_write_text(path, "\n".join([PLOT_HEADER, *rows]) + "\n")


def prediction_rows(test: SupervisedDataset, predicted) -> list[str]:
    """Aligned actual/predicted rows keyed by the target timestamp."""
    stamps = [format_timestamp(t) for t in test.timestamps + np.timedelta64(test.horizon_hours, "h")]
    return _rows("actual", stamps, test.y) + _rows("predicted", stamps, np.asarray(predicted, dtype=float))


def emit_plot_data(table: TimeTable, out_dir, predictions: Optional[dict] = None,
                   bins: int = 40) -> list[Path]:
    """Write the plot series files and return their paths.

    * ``monthly_generation.csv``: total generation per month.
    * ``target_histogram.csv``: generation histogram before (``raw``) and
      after (``transformed``) a Yeo-Johnson fit on the generation column.
    * ``predictions_<methodology>_<model>_<h>h.csv`` for every entry of
      ``predictions``, which maps ``(methodology, model, horizon)`` to a
      ``(test dataset, raw-scale predictions)`` pair.
    """
    out = Path(out_dir)
    written = []
    labels, totals = monthly_totals(table)
    path = out / "monthly_generation.csv"
    _write(path, _rows("monthly_total", labels, totals))
    written.append(path)

    gen = table.columns[GENERATION][~table.missing[GENERATION]]
    rows = _rows("raw", *histogram(gen, bins))
    tt = fit_transformer(gen)
    rows += _rows("transformed", *histogram(tt.apply(gen), bins))
    path = out / "target_histogram.csv"
    _write(path, rows)
    written.append(path)

    for (meth, kind, h), (test, pred) in sorted((predictions or {}).items()):
        path = out / f"predictions_{meth}_{kind}_{h}h.csv"
        _write(path, prediction_rows(test, pred))
        written.append(path)
    return written


def read_plot_data(path) -> dict[str, list[tuple[str, float]]]:
    series: dict[str, list[tuple[str, float]]] = {}
    lines = Path(path).read_text().splitlines()
    for line in lines[1:]:
        name, x, y = line.split(",")
        series.setdefault(name, []).append((x, float(y)))
    return series
