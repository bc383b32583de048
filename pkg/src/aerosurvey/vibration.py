"""Vibration analysis for sensor mounts on small UAVs.

Covers amplitude spectra of accelerometer traces, a damping-effectiveness
figure of merit for isolator selection, and attenuation accounting in dB
and reduction factors.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
import math

import numpy as np
from scipy.signal import find_peaks

from .core import TimeSeries
from .errors import (
    NoCandidatesError,
    NonPositiveFactorError,
    NonPositiveParameterError,
    NonUniformSeriesError,
    TooShortError,
    ZeroAfterAmplitudeError,
)


@dataclass(frozen=True)
class DampingInput:
    """Parameters of the damping-effectiveness figure of merit.

    The figure is dimensionally inconsistent if read as physics; it is a
    ranking score for comparing isolator configurations, never a
    transmissibility. All parameters must be strictly positive.
    """

    intensity: float      # initial vibrational intensity, m/s^2
    damping_ratio: float  # dimensionless
    stiffness: float      # N/m
    mass: float           # supported mass, kg
    count: int            # number of isolators sharing the load
    frequency: float      # excitation frequency, Hz

    def __post_init__(self):
        vals = (self.intensity, self.damping_ratio, self.stiffness,
                self.mass, self.count, self.frequency)
        if any(v <= 0 for v in vals):
            raise NonPositiveParameterError(
                "all damping parameters must be strictly positive")


class IsolatorKind(Enum):
    WIRE_ROPE = "wire_rope"
    RUBBER_BALL = "rubber_ball"


@dataclass(frozen=True)
class IsolatorConfig:
    """A candidate isolator arrangement.

    Per-isolator parameters (intensity, damping_ratio, stiffness) combine
    with a payload mass and excitation frequency at ranking time. Rubber
    ball counts outside 4..12 are outside the design envelope and rejected.
    """

    kind: IsolatorKind
    count: int
    mount_angle_deg: float
    intensity: float
    damping_ratio: float
    stiffness: float

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.kind is IsolatorKind.RUBBER_BALL and not 4 <= self.count <= 12:
            raise ValueError("rubber ball count must be within 4..12")

    def damping_input(self, payload_mass: float, freq_hz: float) -> DampingInput:
        return DampingInput(self.intensity, self.damping_ratio, self.stiffness,
                            payload_mass, self.count, freq_hz)


@dataclass(frozen=True)
class SpectrumResult:
    """Single-sided amplitude spectrum with detected peaks.

    `peaks` is (frequency Hz, amplitude) sorted by amplitude descending;
    a peak is a local maximum whose prominence exceeds the configured
    fraction of the largest bin.
    """

    freqs: np.ndarray       # Hz, ascending
    amplitudes: np.ndarray  # same units as the input signal
    peaks: tuple[tuple[float, float], ...]


_AXIS_FIELD = {"x": "ax_ms2", "y": "ay_ms2", "z": "az_ms2"}


def _axis_column(series: TimeSeries, axis: str) -> np.ndarray:
    axis = axis.lower()
    if axis not in _AXIS_FIELD:
        raise ValueError("axis must be one of x, y, z")
    if series.values.ndim == 1:
        return series.values
    name = _AXIS_FIELD[axis]
    if name in series.fields:
        return series.column(name)
    return series.values[:, "xyz".index(axis)]


def amplitude_spectrum(series: TimeSeries, axis: str = "z",
                       prominence_fraction: float = 0.10) -> SpectrumResult:
    """Single-sided amplitude spectrum of one accelerometer axis.

    Parameters
    ----------
    series : TimeSeries
        Uniformly sampled acceleration, at least 64 samples.
    axis : str
        Body axis to analyze: 'x', 'y' or 'z'.
    prominence_fraction : float
        Peak prominence threshold as a fraction of the maximum bin.

    Notes
    -----
    The trace is mean-removed and tapered with a periodic Hann window.
    Amplitudes are normalized by 2/sum(window), which reduces to the
    plain 2/N single-sided rule for a boxcar and recovers the amplitude
    of an on-bin sine exactly; DC and Nyquist bins are not doubled.
    """
    t = series.t
    if len(t) < 64:
        raise TooShortError("spectrum needs >= 64 samples")
    dt = np.diff(t)
    dt0 = float(np.median(dt))
    if dt0 <= 0 or np.max(np.abs(dt - dt0)) > 1e-6 * dt0:
        raise NonUniformSeriesError("spectrum requires uniform sampling")

    x = _axis_column(series, axis).astype(float)
    x = x - x.mean()
    n = len(x)
    w = 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(n) / n))  # periodic Hann
    spec = np.fft.rfft(x * w)
    amps = 2.0 * np.abs(spec) / w.sum()
    amps[0] *= 0.5
    if n % 2 == 0:
        amps[-1] *= 0.5
    freqs = np.fft.rfftfreq(n, d=dt0)

    peaks: list[tuple[float, float]] = []
    top = float(amps.max())
    if top > 0:
        locs, _ = find_peaks(amps, prominence=prominence_fraction * top)
        peaks = [(float(freqs[i]), float(amps[i])) for i in locs]
        peaks.sort(key=lambda p: (-p[1], p[0]))
    return SpectrumResult(freqs, amps, tuple(peaks))


def damping_effectiveness(inp: DampingInput) -> float:
    """Figure of merit: intensity * damping_ratio * stiffness / (mass * count * f^2)."""
    return (inp.intensity * inp.damping_ratio * inp.stiffness
            / (inp.mass * inp.count * inp.frequency ** 2))


def attenuation_db(reduction: float) -> float:
    """Amplitude ratio expressed in decibels: 20*log10(reduction)."""
    if reduction <= 0:
        raise NonPositiveFactorError("reduction factor must be > 0")
    return 20.0 * math.log10(reduction)


def _rms(x: np.ndarray) -> float:
    x = x - x.mean()
    return float(np.sqrt(np.mean(x * x)))


def reduction_factor(before: TimeSeries, after: TimeSeries,
                     axis: str = "z") -> float:
    """Ratio of mean-removed RMS amplitudes, before/after, per axis."""
    if len(before) == 0 or len(after) == 0:
        raise TooShortError("both series must be non-empty")
    rms_after = _rms(_axis_column(after, axis))
    if rms_after == 0.0:
        raise ZeroAfterAmplitudeError("'after' trace has zero RMS")
    return _rms(_axis_column(before, axis)) / rms_after


def select_configuration(candidates: list[IsolatorConfig], payload_mass: float,
                         dominant_freq: float) -> list[tuple[IsolatorConfig, float]]:
    """Rank isolator configurations by damping effectiveness.

    Evaluated at the dominant excitation frequency with the shared payload
    mass; returns (config, score) best first. Ties break deterministically
    by (kind, count).
    """
    if not candidates:
        raise NoCandidatesError("no isolator candidates")
    if payload_mass <= 0 or dominant_freq <= 0:
        raise NonPositiveParameterError("mass and frequency must be > 0")
    scored = [(c, damping_effectiveness(c.damping_input(payload_mass, dominant_freq)))
              for c in candidates]
    scored.sort(key=lambda cs: (-cs[1], cs[0].kind.value, cs[0].count))
    return scored
