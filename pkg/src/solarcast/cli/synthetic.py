"""Seeded synthetic solar, weather and AQI data with southern-hemisphere seasonality.

Generation is a clear-sky diurnal curve scaled by a seasonal factor that peaks
around the December solstice, attenuated by cloud cover and air pollution,
plus multiplicative noise. Hours with the sun below the horizon are exactly
zero. Cloud cover follows a persistent daily AR(1) process and drives the
humidity, dew point and temperature columns, so the weather carries
information about generation a few days ahead.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .._io import atomic_write_text, fmt
from ..core import AQI, GENERATION, WEATHER_COLUMNS, ConfigError, TimeTable
from ..ingest import format_timestamp

SOLSTICE_DOY = 355  # ~21 December


@dataclass(frozen=True)
class SynthParams:
    start: str = "2021-01-01"
    peak_kwh: float = 220.0  # clear-sky noon output at the seasonal peak
    seasonal_amplitude: float = 0.3
    day_length_amplitude: float = 2.0  # hours either side of 12 h
    cloud_persistence: float = 0.8  # daily AR(1) coefficient of the cloud process
    cloud_attenuation: float = 0.75
    aqi_mean: float = 45.0
    aqi_persistence: float = 0.7
    aqi_attenuation: float = 0.0015  # fractional loss per AQI point
    noise_sd: float = 0.06

    def __post_init__(self):
        try:
            np.datetime64(self.start, "D")
        except ValueError as exc:
            raise ConfigError(f"bad start date {self.start!r}") from exc
        if self.peak_kwh <= 0:
            raise ConfigError("peak_kwh must be positive")
        if not 0 <= self.seasonal_amplitude < 1:
            raise ConfigError("seasonal_amplitude must be in [0, 1)")
        if not 0 <= self.day_length_amplitude < 6:
            raise ConfigError("day_length_amplitude must be in [0, 6)")
        for name in ("cloud_persistence", "aqi_persistence"):
            if not 0 <= getattr(self, name) < 1:
                raise ConfigError(f"{name} must be in [0, 1)")
        if not 0 <= self.cloud_attenuation <= 1:
            raise ConfigError("cloud_attenuation must be in [0, 1]")
        if self.aqi_mean <= 0 or self.aqi_attenuation < 0 or self.noise_sd < 0:
            raise ConfigError("aqi_mean must be positive; aqi_attenuation and noise_sd non-negative")

    @classmethod
    def from_dict(cls, d: dict) -> "SynthParams":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown synthetic-data parameter(s): {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def _ar1(rng: np.random.Generator, n: int, phi: float) -> np.ndarray:
    """Stationary unit-variance AR(1) path."""
    eps = rng.standard_normal(n)
    out = np.empty(n)
    out[0] = eps[0]
    s = np.sqrt(1.0 - phi * phi)
    for i in range(1, n):
        out[i] = phi * out[i - 1] + s * eps[i]
    return out


def generate_synthetic(seed: int, n_days: int, params: SynthParams | dict | None = None) -> TimeTable:
    """Hourly merged table of ``n_days`` days starting at ``params.start`` (local time)."""
    if isinstance(params, dict):
        params = SynthParams.from_dict(params)
    p = params or SynthParams()
    if int(n_days) < 1:
        raise ConfigError(f"n_days must be >= 1, got {n_days}")
    n_days = int(n_days)
    rng = np.random.default_rng(seed)

    day0 = np.datetime64(p.start, "D")
    days = day0 + np.arange(n_days)
    doy = (days - days.astype("datetime64[Y]")).astype(np.int64) + 1
    ts = (days.astype("datetime64[h]")[:, None] + np.arange(24)).reshape(-1).astype("datetime64[s]")
    n = ts.size
    hour = np.tile(np.arange(24, dtype=float), n_days)
    d_idx = np.repeat(np.arange(n_days), 24)

    season = np.cos(2 * np.pi * (doy - SOLSTICE_DOY) / 365.25)  # +1 at the December solstice
    day_len = 12.0 + p.day_length_amplitude * season
    sunrise = 12.0 - day_len / 2
    # sun elevation proxy at the middle of each hour
    phase = (hour + 0.5 - sunrise[d_idx]) / day_len[d_idx]
    clear = np.where((phase > 0) & (phase < 1), np.sin(np.pi * np.clip(phase, 0, 1)), 0.0) ** 1.3
    seasonal = 1.0 + p.seasonal_amplitude * season

    # daily cloud latent, interpolated hourly with a little intraday jitter
    z_day = _ar1(rng, n_days + 1, p.cloud_persistence)
    frac = hour / 24.0
    z = (1 - frac) * z_day[d_idx] + frac * z_day[d_idx + 1] + 0.25 * _ar1(rng, n, 0.9)
    cloud = 1.0 / (1.0 + np.exp(-(1.6 * z - 0.4)))

    aqi_day = p.aqi_mean * np.exp(0.35 * _ar1(rng, n_days, p.aqi_persistence) + 0.2 * season)
    aqi = aqi_day[d_idx]

    atten = (1.0 - p.cloud_attenuation * cloud) * np.clip(1.0 - p.aqi_attenuation * aqi, 0.0, 1.0)
    noise = np.exp(p.noise_sd * rng.standard_normal(n) - 0.5 * p.noise_sd ** 2)
    gen = p.peak_kwh * clear * seasonal[d_idx] * atten * noise
    gen = np.where(clear > 0, np.maximum(gen, 0.0), 0.0)

    diurnal = np.sin(np.pi * (hour - 6.0) / 12.0)  # warmest mid-afternoon is close enough
    air = (20.0 + 6.0 * season[d_idx] + 5.0 * diurnal * (1.0 - 0.6 * cloud)
           + 1.0 * rng.standard_normal(n))
    humidity = np.clip(45.0 + 40.0 * cloud - 8.0 * diurnal + 4.0 * rng.standard_normal(n), 3.0, 100.0)
    dew = air - (100.0 - humidity) / 5.0 + 0.5 * rng.standard_normal(n)
    wind = np.abs(2.5 + 1.5 * _ar1(rng, n, 0.95) + 0.8 * cloud)
    wind_dir = np.mod(180.0 + 90.0 * _ar1(rng, n, 0.97), 360.0)
    apparent = air + 0.33 * (humidity / 100.0 * 6.105 * np.exp(17.27 * air / (237.7 + air))) - 0.7 * wind - 4.0

    cols = {
        GENERATION: gen,
        "air_temp": air,
        "apparent_temp": apparent,
        "dew_point": dew,
        "wind_speed": wind,
        "wind_direction": wind_dir,
        "humidity": humidity,
        AQI: aqi,
    }
    assert set(WEATHER_COLUMNS) <= set(cols)
    return TimeTable(ts, cols, {}, None, hourly=True, diagnostics={"rows": n})


def write_sources(t: TimeTable, out_dir) -> dict[str, Path]:
    """Write ``t`` as the three raw inputs: 15-minute solar, hourly weather, daily AQI.

    Each hour's generation is spread evenly over its four quarter-hours, so
    summing back to hourly reproduces it up to rounding.
    """
    out = Path(out_dir)
    quarter = np.timedelta64(15, "m")
    lines = ["timestamp,generation_kwh"]
    for ts, g in zip(t.timestamps, t.columns[GENERATION]):
        q = g / 4.0
        for k in range(4):
            lines.append(f"{format_timestamp(ts + k * quarter)},{fmt(q)}")
    solar = atomic_write_text(out / "solar.csv", "\n".join(lines) + "\n")

    lines = ["timestamp," + ",".join(WEATHER_COLUMNS)]
    for i, ts in enumerate(t.timestamps):
        lines.append(",".join([format_timestamp(ts)] + [fmt(t.columns[c][i]) for c in WEATHER_COLUMNS]))
    weather = atomic_write_text(out / "weather.csv", "\n".join(lines) + "\n")

    days = t.timestamps.astype("datetime64[D]")
    first = np.r_[True, days[1:] != days[:-1]]
    lines = ["date,aqi"] + [f"{d},{fmt(a)}" for d, a in zip(days[first], t.columns[AQI][first])]
    aqi = atomic_write_text(out / "aqi.csv", "\n".join(lines) + "\n")
    return {"solar": solar, "weather": weather, "aqi": aqi}
