"""Derived quantities from observable series: long-time meson size,
dominant breathing frequency, propagation speed, and size-resolved
spatial filtering.

All extractors take an explicit AnalysisWindow so the transient cutoff
and the boundary-reflection guard are visible at the call site instead
of buried in defaults.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import InvalidArgumentError, NoOscillationError

__all__ = [
    "AnalysisWindow",
    "MesonSummary",
    "SpeedFit",
    "window_for",
    "long_time_average",
    "dominant_frequency",
    "fit_speed",
    "size_filtering_profile",
    "summarize",
    "fit_line",
    "fit_inverse_field",
    "front_extent",
]

MIN_AVERAGE_SAMPLES = 50
MIN_SPECTRUM_SAMPLES = 128
PROMINENCE_FLOOR = 3.0
SPEED_CONFIDENCE_R2 = 0.95
DEFAULT_TRANSIENT_CUTOFF = 10.0
FILTER_PROBABILITY_FLOOR = 1e-6
FRONT_DENSITY_LEVEL = 1e-2


@dataclass(frozen=True)
class AnalysisWindow:
    """Closed time window [t_start, t_end], reflection-guard aware."""

    t_start: float
    t_end: float
    guard_applied: bool = False
    guard_time: float = math.inf

    def __post_init__(self):
        if not 0.0 <= self.t_start < self.t_end:
            raise InvalidArgumentError(
                f"need 0 <= t_start < t_end, got [{self.t_start}, {self.t_end}]"
            )


def window_for(series, t_start=DEFAULT_TRANSIENT_CUTOFF, t_end=60.0):
    """Clip the requested window to the series' reflection guard."""
    guard = series.guard_time
    end = min(float(t_end), guard)
    return AnalysisWindow(t_start=float(t_start), t_end=end,
                          guard_applied=end < t_end, guard_time=guard)


def _window_mask(series, window):
    mask = (series.times >= window.t_start) & (series.times <= window.t_end)
    return mask & ~series.reflected


def long_time_average(series, window):
    """Arithmetic mean of r_avg over the window (>= 50 samples)."""
    mask = _window_mask(series, window)
    n = int(mask.sum())
    if n == 0:
        raise InvalidArgumentError("window selects no samples")
    if n < MIN_AVERAGE_SAMPLES:
        raise InvalidArgumentError(
            f"window must contain >= {MIN_AVERAGE_SAMPLES} samples, got {n}"
        )
    return float(series.r_avg[mask].mean())


def _check_uniform(t):
    dt = np.diff(t)
    if len(dt) == 0 or np.max(np.abs(dt - dt[0])) > 1e-9 * abs(dt[0]):
        raise InvalidArgumentError("frequency extraction needs a uniform grid")
    return float(dt[0])


def dominant_frequency(series, window, pad_factor=8):
    """Angular frequency of the strongest r_avg oscillation in the window.

    Mean-subtracted, Hann-windowed, zero-padded (x pad_factor) DFT; the
    peak is the largest-magnitude bin excluding the zero-frequency bin
    and its two neighbors, refined by a quadratic fit through the peak
    and its two neighbors.
    """
    if pad_factor < 1:
        raise InvalidArgumentError("pad_factor must be >= 1")
    mask = _window_mask(series, window)
    t = series.times[mask]
    n = len(t)
    if n < MIN_SPECTRUM_SAMPLES:
        raise InvalidArgumentError(
            f"need >= {MIN_SPECTRUM_SAMPLES} samples in the window, got {n}"
        )
    dt = _check_uniform(t)
    y = series.r_avg[mask]
    y = (y - y.mean()) * np.hanning(n)
    magnitude = np.abs(np.fft.rfft(y, pad_factor * n))

    lowest = 3  # DC bin plus its two neighbors
    k = lowest + int(np.argmax(magnitude[lowest:]))
    floor = float(np.median(magnitude))
    peak = float(magnitude[k])
    if peak == 0.0 or peak < PROMINENCE_FLOOR * floor:
        raise NoOscillationError("no oscillation detected")

    delta = 0.0
    if 0 < k < len(magnitude) - 1:
        left, mid, right = magnitude[k - 1:k + 2]
        curv = left - 2.0 * mid + right
        if curv != 0.0:
            delta = 0.5 * (left - right) / curv
    bin_width = 2.0 * math.pi / (pad_factor * n * dt)
    return (k + delta) * bin_width


def _peak_prominence(series, window, pad_factor=8):
    try:
        omega = dominant_frequency(series, window, pad_factor)
    except NoOscillationError:
        return math.nan, 0.0
    mask = _window_mask(series, window)
    t = series.times[mask]
    y = series.r_avg[mask]
    y = (y - y.mean()) * np.hanning(len(t))
    magnitude = np.abs(np.fft.rfft(y, pad_factor * len(t)))
    floor = float(np.median(magnitude))
    return omega, float(magnitude[3:].max() / floor) if floor else math.inf


def fit_line(x, y):
    """Least squares y = m x + b; returns (m, b, r_squared)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) != len(y) or len(x) < 2:
        raise InvalidArgumentError("need >= 2 paired samples")
    coeff = np.polyfit(x, y, 1)
    resid = y - np.polyval(coeff, x)
    total = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if total == 0.0 else 1.0 - float((resid ** 2).sum()) / total
    return float(coeff[0]), float(coeff[1]), r2


def fit_inverse_field(h_values, r_prime_values):
    """Best a for r'_avg - 1 = a/h, with uncentered R^2.

    The model is through the origin in the variable 1/h, so R^2 compares
    residuals against the raw (uncentered) second moment of the data;
    the centered convention can go negative for through-origin fits.
    """
    h = np.asarray(h_values, dtype=np.float64)
    y = np.asarray(r_prime_values, dtype=np.float64) - 1.0
    if len(h) != len(y) or len(h) < 2:
        raise InvalidArgumentError("need >= 2 paired samples")
    x = 1.0 / h
    a = float((x * y).sum() / (x * x).sum())
    ss_res = float(((y - a * x) ** 2).sum())
    ss_raw = float((y ** 2).sum())
    r2 = 1.0 if ss_raw == 0.0 else 1.0 - ss_res / ss_raw
    return a, r2


@dataclass(frozen=True)
class SpeedFit:
    v: float
    r_squared: float
    low_confidence: bool
    samples: int


def fit_speed(series, window):
    """Propagation speed: least-squares slope of c_s over the window.

    R^2 below 0.95 flags the fit low-confidence; the slope is still
    returned so sweeps can report every point.
    """
    mask = _window_mask(series, window)
    n = int(mask.sum())
    if n < 2:
        raise InvalidArgumentError("window selects fewer than 2 samples")
    slope, _, r2 = fit_line(series.times[mask], series.c_s[mask])
    return SpeedFit(v=slope, r_squared=r2,
                    low_confidence=r2 < SPEED_CONFIDENCE_R2, samples=n)


def size_filtering_profile(grid, r_values=None):
    """Mean center displacement |c - c_center| conditioned on each size r.

    Sizes whose total probability is below 1e-6 are omitted; asking for
    them explicitly also yields an omission rather than a noisy ratio.
    """
    c_center = 0.5 * (grid.c_values[0] + grid.c_values[-1])
    disp = np.abs(grid.c_values - c_center)
    if r_values is None:
        r_values = [int(r) for r in grid.r_values]
    out = {}
    for r in r_values:
        rows = np.flatnonzero(grid.r_values == r)
        if len(rows) != 1:
            raise InvalidArgumentError(f"size {r} not on the grid")
        weights = grid.probabilities[rows[0]]
        mass = float(weights.sum())
        if mass < FILTER_PROBABILITY_FLOOR:
            continue
        out[int(r)] = float((weights * disp).sum() / mass)
    return out


def front_extent(series):
    """Farthest distance from center with density above 1e-2, per time.

    Diagnostic only; the speed definition is the c_s slope, not front
    tracking.
    """
    L = series.density.shape[1]
    center = (L + 1) / 2.0
    dist = np.abs(np.arange(1, L + 1) - center)
    out = np.zeros(len(series.times))
    for i in range(len(series.times)):
        hot = series.density[i] > FRONT_DENSITY_LEVEL
        out[i] = dist[hot].max() if hot.any() else 0.0
    return out


@dataclass(frozen=True)
class MesonSummary:
    """Headline numbers for one run: size, frequency, speed."""

    r_prime_avg: float
    omega: float
    v: float
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.r_prime_avg < 1.0 - 1e-9:
            raise InvalidArgumentError("mean meson size cannot be below 1")
        if not math.isnan(self.omega) and self.omega < 0.0:
            raise InvalidArgumentError("omega must be nonnegative")
        if self.v < 0.0 and not self.diagnostics.get("speed_low_confidence"):
            raise InvalidArgumentError(
                "negative speed must carry the low-confidence flag"
            )


def summarize(series, window, pad_factor=8):
    """Assemble the MesonSummary for one run."""
    r_prime = long_time_average(series, window)
    omega, prominence = _peak_prominence(series, window, pad_factor)
    speed = fit_speed(series, window)
    diagnostics = {
        "window": (window.t_start, window.t_end),
        "guard_applied": window.guard_applied,
        "samples": speed.samples,
        "speed_r_squared": speed.r_squared,
        "speed_low_confidence": speed.low_confidence,
        "peak_prominence": prominence,
    }
    return MesonSummary(r_prime_avg=r_prime, omega=omega, v=speed.v,
                        diagnostics=diagnostics)
