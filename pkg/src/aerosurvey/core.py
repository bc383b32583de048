"""Core data model: positions, samples, time series, survey lines.

Units are normalized at the ingestion boundary and never mixed afterwards:
seconds, meters (UTM easting/northing, altitude AGL), nanotesla, percent,
ppm, degrees. Angles are stored in degrees; kernels convert to radians
internally.

All containers are immutable after construction (arrays are marked
read-only), so they are safe to share across threads. Operations are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import TooFewSamplesError


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


@dataclass(frozen=True)
class UtmPoint:
    """A projected position: easting/northing in meters, altitude m AGL."""

    easting: float
    northing: float
    alt: float = 0.0

    def __post_init__(self):
        if not _finite(self.easting, self.northing, self.alt):
            raise ValueError("UtmPoint coordinates must be finite")


@dataclass(frozen=True)
class AccelSample:
    """Body-frame acceleration, m/s^2; z is vertical."""

    ax: float
    ay: float
    az: float

    def __post_init__(self):
        if not _finite(self.ax, self.ay, self.az):
            raise ValueError("acceleration must be finite")


@dataclass(frozen=True)
class MagSample:
    position: UtmPoint
    tmi: float  # total magnetic intensity, nT

    def __post_init__(self):
        if not math.isfinite(self.tmi):
            raise ValueError("tmi must be finite")


@dataclass(frozen=True)
class VlfSample:
    position: UtmPoint
    in_phase: float      # percent
    out_of_phase: float  # percent
    h1: float            # percent
    h2: float            # percent
    pt: float            # total field at the receiver, nT
    roll: float          # degrees
    pitch: float         # degrees

    def __post_init__(self):
        for a in (self.roll, self.pitch):
            if not -180.0 <= a <= 180.0:
                raise ValueError("roll/pitch must be within [-180, 180] deg")


@dataclass(frozen=True)
class RadSample:
    """Radiometric sample. th and raw_spectrum are absent (None) when the
    instrument did not record them; zero is a valid physical reading and is
    never used to mean 'missing'."""

    position: UtmPoint
    k: float                                   # percent
    u: float                                   # ppm
    th: float | None = None                    # ppm
    raw_spectrum: tuple[float, ...] | None = None  # counts per channel

    def __post_init__(self):
        if self.k < 0 or self.u < 0 or (self.th is not None and self.th < 0):
            raise ValueError("k/u/th must be >= 0")
        if self.raw_spectrum is not None and any(c < 0 for c in self.raw_spectrum):
            raise ValueError("spectrum counts must be >= 0")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)  # copy: never freeze the caller's buffer
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class TimeSeries:
    """Timestamps plus one value per timestamp.

    `values` is (n,) for a scalar trace or (n, k) for a multi-channel
    record, with `fields` naming the k columns (CSV header names, so a
    magnetometer series has fields ('easting_m', 'northing_m', 'alt_m',
    'tmi_nT')). Timestamps are strictly increasing.
    """

    t: np.ndarray
    values: np.ndarray
    fields: tuple[str, ...] = ()

    def __post_init__(self):
        t = _readonly(self.t)
        v = _readonly(self.values)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)
        if t.ndim != 1:
            raise ValueError("t must be 1-D")
        if len(t) != len(v):
            raise ValueError("t and values length mismatch")
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("timestamps must be strictly increasing")
        if v.ndim == 2 and self.fields and v.shape[1] != len(self.fields):
            raise ValueError("fields/value column count mismatch")

    def __len__(self) -> int:
        return len(self.t)

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0]) if len(self.t) else 0.0

    def column(self, name: str) -> np.ndarray:
        """Named channel of a multi-channel series (or the scalar trace)."""
        if self.values.ndim == 1:
            if self.fields and self.fields != (name,):
                raise KeyError(name)
            return self.values
        try:
            j = self.fields.index(name)
        except ValueError:
            raise KeyError(name) from None
        return self.values[:, j]

    def scalar(self, name: str | None = None) -> np.ndarray:
        """The series as a 1-D trace; `name` selects a channel if 2-D."""
        if self.values.ndim == 1:
            return self.values
        if name is None:
            raise ValueError("multi-channel series: channel name required")
        return self.column(name)

    def with_column(self, name: str, new: np.ndarray) -> "TimeSeries":
        """Copy with one channel replaced."""
        j = self.fields.index(name)
        v = np.array(self.values)
        v[:, j] = new
        return TimeSeries(self.t, v, self.fields)


class LineRole(Enum):
    FLIGHT = "flight"
    TIE = "tie"


@dataclass(frozen=True)
class SurveyLine:
    """One acquisition line: an id, its role, and a positioned series.

    The series must carry easting_m/northing_m columns; that is what makes
    crossover geometry possible.
    """

    line_id: str
    role: LineRole
    series: TimeSeries

    def __post_init__(self):
        if len(self.series) < 2:
            raise ValueError("survey line needs at least 2 samples")
        for c in ("easting_m", "northing_m"):
            if c not in self.series.fields:
                raise ValueError(f"survey line series lacks {c}")

    def positions(self) -> np.ndarray:
        """(n, 2) easting/northing."""
        return np.column_stack(
            [self.series.column("easting_m"), self.series.column("northing_m")]
        )

    def field_values(self, name: str) -> np.ndarray:
        return self.series.column(name)


def resample_uniform(series: TimeSeries, rate_hz: float) -> TimeSeries:
    """Linearly interpolate a series onto a uniform grid.

    The grid starts at the first timestamp, has spacing exactly 1/rate_hz,
    and spans the original time range (last node <= last timestamp, up to
    float rounding). Exact on affine inputs.
    """
    if rate_hz <= 0:
        raise ValueError("rate_hz must be > 0")
    if len(series) < 2:
        raise TooFewSamplesError("resample needs >= 2 samples")
    t0, t1 = float(series.t[0]), float(series.t[-1])
    span = t1 - t0
    # count nodes with a tolerance so span*rate == integer survives rounding
    n = int(math.floor(span * rate_hz * (1 + 1e-12) + 1e-9)) + 1
    new_t = t0 + np.arange(n) / rate_hz
    if series.values.ndim == 1:
        new_v = np.interp(new_t, series.t, series.values)
    else:
        new_v = np.column_stack(
            [np.interp(new_t, series.t, series.values[:, j])
             for j in range(series.values.shape[1])]
        )
    return TimeSeries(new_t, new_v, series.fields)
