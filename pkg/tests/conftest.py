import numpy as np
import pytest

from solarcast.cli.synthetic import generate_synthetic
from solarcast.core import AQI, GENERATION, WEATHER_COLUMNS, TimeTable


def hourly_table(n, start="2022-01-01", gen=None, seed=0, gap_rows=()):
    """Gapless hourly table with random weather; ``gap_rows`` become gap markers."""
    rng = np.random.default_rng(seed)
    ts = (np.datetime64(start, "h") + np.arange(n)).astype("datetime64[s]")
    cols = {GENERATION: rng.uniform(0, 50, n) if gen is None else np.asarray(gen, dtype=float)}
    for name in WEATHER_COLUMNS:
        cols[name] = rng.uniform(0, 90, n)
    cols[AQI] = rng.uniform(10, 80, n)
    gap = np.zeros(n, dtype=bool)
    gap[list(gap_rows)] = True
    missing = {k: gap.copy() for k in cols}
    return TimeTable(ts, cols, missing, gap, hourly=True)


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture(scope="session")
def synth_small():
    return generate_synthetic(11, 90)


@pytest.fixture(scope="session")
def synth_730():
    return generate_synthetic(0, 730)
