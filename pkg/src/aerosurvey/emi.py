"""Buzz-test analysis: platform EMI noise versus UAV-sensor separation.

A buzz test flies the UAV over (or hovers/yaws above) a stationary sensor
at a series of separations. Each pass yields a noise amplitude; amplitudes
versus separation are fitted with a power-law decay, and the minimum
acceptable separation is where the decay falls to the ambient noise floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.ndimage import median_filter

from .core import TimeSeries
from .errors import (
    NeverBelowFloorError,
    NoFitAvailableError,
    NonPositiveParameterError,
    TooFewSeparationsError,
    TraceTooShortError,
)


class PassKind(Enum):
    OVERFLIGHT = "overflight"
    HOVER_YAW = "hover_yaw"


@dataclass(frozen=True)
class BuzzPass:
    """One buzz-test pass: a sensor trace recorded at a fixed separation."""

    separation: float          # m between UAV and sensor
    trace: TimeSeries          # scalar trace (nT or percent channel)
    kind: PassKind = PassKind.OVERFLIGHT
    speed_mps: float | None = None  # recorded metadata only

    def __post_init__(self):
        if self.separation <= 0:
            raise ValueError("separation must be > 0")
        if len(self.trace) == 0:
            raise ValueError("trace must be non-empty")


@dataclass(frozen=True)
class EmiConfig:
    noise_floor: float = 0.2            # ambient level, nT
    interference_pct_limit: float = 4.0  # acceptance limit on A/signal, percent

    def __post_init__(self):
        if self.noise_floor <= 0 or self.interference_pct_limit <= 0:
            raise ValueError("noise_floor and interference_pct_limit must be > 0")


@dataclass(frozen=True)
class NoiseCurve:
    """Ambient-corrected noise amplitude per separation, plus optional fit.

    `points` are (separation m, amplitude) with separations strictly
    increasing; amplitudes are the platform's contribution after the
    ambient floor has been removed in quadrature. `fitted_decay` is
    (amplitude_at_1m, exponent) for A(r) = A1 * r**-p, or None when no
    usable points existed (flagged curve).
    """

    points: tuple[tuple[float, float], ...]
    fitted_decay: tuple[float, float] | None = None

    def __post_init__(self):
        seps = [p[0] for p in self.points]
        if any(b <= a for a, b in zip(seps, seps[1:])):
            raise ValueError("separations must be strictly increasing")
        if any(p[1] < 0 for p in self.points):
            raise ValueError("amplitudes must be >= 0")

    def amplitude_at(self, r: float) -> float:
        if self.fitted_decay is None:
            raise NoFitAvailableError("curve has no fitted decay")
        a1, p = self.fitted_decay
        return a1 * r ** (-p)


def noise_amplitude(trace: TimeSeries, detrend_window_s: float = 1.0) -> float:
    """Robust noise amplitude of a trace.

    A moving median over `detrend_window_s` removes the slow signal
    (regional field, pass geometry); the amplitude is half the
    97.5th-2.5th percentile span of the residual, so isolated spikes do
    not dominate. The trace must span at least 3 detrend windows.
    """
    if detrend_window_s <= 0:
        raise NonPositiveParameterError("detrend window must be > 0")
    if trace.duration < 3.0 * detrend_window_s:
        raise TraceTooShortError("trace must span >= 3 detrend windows")
    if trace.values.ndim == 1:
        x = trace.values
    elif "tmi_nT" in trace.fields:
        x = trace.column("tmi_nT")
    else:
        x = trace.values[:, -1]
    dt = float(np.median(np.diff(trace.t)))
    k = max(3, int(round(detrend_window_s / dt)) | 1)  # odd sample count
    k = min(k, len(x) if len(x) % 2 else len(x) - 1)
    resid = x - median_filter(x.astype(float), size=k, mode="nearest")
    lo, hi = np.percentile(resid, [2.5, 97.5])
    return float(hi - lo) / 2.0


def fit_power_law(separations: np.ndarray,
                  amplitudes: np.ndarray) -> tuple[float, float] | None:
    """Least-squares fit of A(r) = A1 * r**-p in log-log space.

    Only strictly positive amplitudes participate. Returns (A1, p), or
    None when fewer than two usable distinct separations remain.
    """
    r = np.asarray(separations, dtype=float)
    a = np.asarray(amplitudes, dtype=float)
    keep = a > 0
    if keep.sum() < 2 or len(np.unique(r[keep])) < 2:
        return None
    lx = np.log(r[keep])
    ly = np.log(a[keep])
    mx, my = lx.mean(), ly.mean()
    slope = float(np.sum((lx - mx) * (ly - my)) / np.sum((lx - mx) ** 2))
    intercept = my - slope * mx
    return math.exp(intercept), -slope


def build_noise_curve(passes: list[BuzzPass], cfg: EmiConfig,
                      detrend_window_s: float = 1.0) -> NoiseCurve:
    """Aggregate buzz passes into an ambient-corrected noise curve.

    Per separation, the amplitude is the median across passes. The ambient
    floor is then removed in quadrature (incoherent noise adds in power):
    excess = sqrt(max(amp^2 - floor^2, 0)). The power law is fitted over
    points whose excess exceeds the floor itself (signal-to-ambient >= 1);
    points at or below ambient measure the site, not the platform, and
    would otherwise flatten the fitted decay.
    """
    groups: dict[float, list[float]] = {}
    for p in passes:
        groups.setdefault(p.separation, []).append(
            noise_amplitude(p.trace, detrend_window_s))
    if len(groups) < 3:
        raise TooFewSeparationsError("need >= 3 distinct separations")
    seps = np.array(sorted(groups))
    med = np.array([float(np.median(groups[s])) for s in seps])
    excess = np.sqrt(np.maximum(med ** 2 - cfg.noise_floor ** 2, 0.0))
    fit_mask = excess > cfg.noise_floor
    fit = fit_power_law(seps[fit_mask], excess[fit_mask])
    points = tuple((float(s), float(e)) for s, e in zip(seps, excess))
    return NoiseCurve(points, fit)


def _round_up_half_meter(r: float) -> float:
    return math.ceil(r / 0.5 - 1e-9) * 0.5


def threshold_separation(curve: NoiseCurve, cfg: EmiConfig) -> float:
    """Smallest separation at which platform noise is at or below the floor.

    Uses the fitted decay when available (continuous inversion), otherwise
    scans the measured points, which must then be monotone non-increasing.
    The result is rounded UP to the next 0.5 m: separation is a safety
    margin, never rounded toward the platform.
    """
    if not curve.points:
        raise ValueError("empty noise curve")
    floor = cfg.noise_floor
    if curve.points[0][1] <= floor:
        return curve.points[0][0]
    if curve.fitted_decay is not None and curve.fitted_decay[1] > 0:
        a1, p = curve.fitted_decay
        return _round_up_half_meter((a1 / floor) ** (1.0 / p))
    amps = [a for _, a in curve.points]
    if any(b > a for a, b in zip(amps, amps[1:])):
        raise ValueError("no fit and points not monotone non-increasing")
    for sep, amp in curve.points:
        if amp <= floor:
            return _round_up_half_meter(sep)
    raise NeverBelowFloorError("amplitude above floor at all separations")


def interference_percent(curve: NoiseCurve, separation: float,
                         signal_scale: float) -> float:
    """Fitted platform amplitude at `separation` as a percent of a signal scale."""
    if signal_scale <= 0 or separation <= 0:
        raise NonPositiveParameterError("separation and signal scale must be > 0")
    return 100.0 * curve.amplitude_at(separation) / signal_scale


def analyze_passes(passes: list[BuzzPass], cfg: EmiConfig,
                   detrend_window_s: float = 1.0,
                   interference_at: tuple[float, ...] = (),
                   signal_scale: float | None = None) -> dict:
    """Full buzz-test report used by the CLI.

    Overflight and hover/yaw passes are analyzed separately and the
    conservative (larger) threshold is reported; the top-level curve and
    fit are the ones that produced it. Separations merge in ascending
    order, then pass kind, so the report is deterministic.
    """
    by_kind: dict[PassKind, list[BuzzPass]] = {}
    for p in sorted(passes, key=lambda p: (p.separation, p.kind.value)):
        by_kind.setdefault(p.kind, []).append(p)

    per_kind: dict[str, dict] = {}
    worst: tuple[float, NoiseCurve] | None = None
    for kind in sorted(by_kind, key=lambda k: k.value):
        curve = build_noise_curve(by_kind[kind], cfg, detrend_window_s)
        try:
            thr = threshold_separation(curve, cfg)
        except NeverBelowFloorError:
            thr = math.inf
        per_kind[kind.value] = {
            "points": [list(pt) for pt in curve.points],
            "fit": (None if curve.fitted_decay is None
                    else {"a1": curve.fitted_decay[0], "p": curve.fitted_decay[1]}),
            "threshold_m": thr,
        }
        if worst is None or thr > worst[0]:
            worst = (thr, curve)

    assert worst is not None  # passes list validated by build_noise_curve
    thr, curve = worst
    if math.isinf(thr):
        raise NeverBelowFloorError("amplitude above floor at all separations")
    interference = []
    if signal_scale is not None:
        for r in interference_at:
            interference.append(
                {"r": r, "pct": interference_percent(curve, r, signal_scale)})
    return {
        "points": [list(pt) for pt in curve.points],
        "fit": (None if curve.fitted_decay is None
                else {"a1": curve.fitted_decay[0], "p": curve.fitted_decay[1]}),
        "threshold_m": thr,
        "interference_pct_at": interference,
        "per_kind": per_kind,
        "noise_floor": cfg.noise_floor,
    }
