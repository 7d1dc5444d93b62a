"""Spectrum of the squared amplitude and its low-frequency characterization.

The pipeline is ``square_signal -> periodogram -> log_bin -> fit_power_law``,
plus :func:`ubr_ratio` (power at 0.1 Hz over the strongest line above
100 Hz) and a zero-crossing event series usable as an alternative input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BandError, ParameterError
from .series import TimeSeries

MIN_PERIODOGRAM_SAMPLES = 16
MIN_FIT_POINTS = 8
DEFAULT_BINS_PER_DECADE = 20
DEFAULT_FIT_HIGH = 100.0
UBR_ABSENT_BELOW = 1e-2


@dataclass(frozen=True, eq=False)
class PowerSpectrum:
    """One-sided spectrum with ascending frequencies.

    ``dc_power`` keeps the dropped zero-frequency term so that totals can be
    reconstructed; ``binned`` marks output of :func:`log_bin`.
    """

    frequencies: np.ndarray
    power: np.ndarray
    normalization: str = "|X_k|^2/n"
    resolution: float = 0.0
    duration: float = 0.0
    dc_dropped: bool = True
    dc_power: float = 0.0
    window: str = "none"
    binned: bool = False
    n_samples: int = 0

    def __len__(self):
        return self.frequencies.size

    def metadata(self) -> dict:
        return {
            "normalization": self.normalization,
            "resolution_hz": self.resolution,
            "duration_s": self.duration,
            "dc_dropped": self.dc_dropped,
            "window": self.window,
            "binned": self.binned,
            "n_samples": self.n_samples,
            "points": int(self.frequencies.size),
        }


@dataclass(frozen=True)
class PowerLawFit:
    index: float
    log10_amplitude: float
    band: tuple[float, float]
    r_squared: float
    bin_count: int

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "log10_amplitude": self.log10_amplitude,
            "band": list(self.band),
            "r_squared": self.r_squared,
            "bin_count": self.bin_count,
        }


@dataclass(frozen=True)
class UBRRatio:
    value: float
    low_freq: float = 0.1
    high_threshold: float = 100.0
    low_bin_freq: float = 0.1
    high_peak_freq: float = 0.0
    flagged: bool = False

    @property
    def detected(self) -> bool:
        return self.value >= UBR_ABSENT_BELOW

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "low_freq": self.low_freq,
            "high_threshold": self.high_threshold,
            "low_bin_freq": self.low_bin_freq,
            "high_peak_freq": self.high_peak_freq,
            "low_freq_unresolved": self.flagged,
            "ubr_detected": self.detected,
        }


def square_signal(signal: TimeSeries) -> TimeSeries:
    return TimeSeries(np.square(signal.samples), signal.sample_rate)


def _window(name: str, n: int) -> np.ndarray | None:
    if name in (None, "none", "rect", "rectangular"):
        return None
    if name == "hann":
        return np.hanning(n)
    raise ParameterError(f"unknown window {name!r}; use 'none' or 'hann'")


def periodogram(signal: TimeSeries, window: str = "none") -> PowerSpectrum:
    """One-sided periodogram ``|X_k|^2 / n`` for ``k = 1 .. n//2``.

    Frequencies are ``k / tau`` with ``tau = n / sample_rate``. The DC term is
    dropped from the arrays and kept in ``dc_power``. With ``window='hann'``
    the data are tapered and the normalization becomes ``|X_k|^2 / sum(w^2)``.
    """
    x = signal.samples
    n = x.size
    if n < MIN_PERIODOGRAM_SAMPLES:
        raise ParameterError(f"periodogram needs at least {MIN_PERIODOGRAM_SAMPLES} samples, got {n}")
    w = _window(window, n)
    if w is None:
        spectrum = np.fft.rfft(x)
        norm, tag, wname = float(n), "|X_k|^2/n", "none"
    else:
        spectrum = np.fft.rfft(x * w)
        norm, tag, wname = float(np.sum(w * w)), "|X_k|^2/sum(w^2)", window
    power = (spectrum.real**2 + spectrum.imag**2) / norm
    tau = n / signal.sample_rate
    freqs = np.arange(power.size) / tau
    return PowerSpectrum(
        frequencies=freqs[1:],
        power=power[1:],
        normalization=tag,
        resolution=1.0 / tau,
        duration=tau,
        dc_dropped=True,
        dc_power=float(power[0]),
        window=wname,
        n_samples=n,
    )


def total_power(spectrum: PowerSpectrum) -> float:
    """Sum of ``|X_k|^2 / n`` over the full two-sided spectrum."""
    p = spectrum.power
    if spectrum.n_samples % 2 == 0:
        return float(spectrum.dc_power + 2.0 * p[:-1].sum() + p[-1])
    return float(spectrum.dc_power + 2.0 * p.sum())


def log_bin(spectrum: PowerSpectrum, bins_per_decade: int = DEFAULT_BINS_PER_DECADE) -> PowerSpectrum:
    """Average a spectrum into logarithmically spaced bins.

    Bin ``j`` covers ``[10**(j/b), 10**((j+1)/b))``. Its power is the
    arithmetic mean of the member powers and its frequency the geometric mean
    of the member frequencies. Empty bins do not appear.
    """
    if bins_per_decade < 4:
        raise ParameterError(f"bins_per_decade must be >= 4, got {bins_per_decade}")
    f = spectrum.frequencies
    keep = f > 0
    f = f[keep]
    p = spectrum.power[keep]
    if f.size == 0:
        return replace_arrays(spectrum, np.empty(0), np.empty(0), bins_per_decade)
    # Small guard so exact bin edges land in the upper bin despite rounding.
    idx = np.floor(np.log10(f) * bins_per_decade + 1e-9).astype(np.int64)
    edges = np.flatnonzero(np.diff(idx)) + 1
    starts = np.concatenate(([0], edges))
    counts = np.diff(np.concatenate((starts, [f.size])))
    mean_p = np.add.reduceat(p, starts) / counts
    geo_f = np.exp(np.add.reduceat(np.log(f), starts) / counts)
    return replace_arrays(spectrum, geo_f, mean_p, bins_per_decade)


def replace_arrays(spectrum: PowerSpectrum, freqs, power, bins_per_decade) -> PowerSpectrum:
    return PowerSpectrum(
        frequencies=freqs,
        power=power,
        normalization=spectrum.normalization + f"; log-binned mean, {bins_per_decade}/decade",
        resolution=spectrum.resolution,
        duration=spectrum.duration,
        dc_dropped=spectrum.dc_dropped,
        dc_power=spectrum.dc_power,
        window=spectrum.window,
        binned=True,
        n_samples=spectrum.n_samples,
    )


def default_fit_band(duration: float, high: float = DEFAULT_FIT_HIGH) -> tuple[float, float]:
    """``[max(2/tau, 0.05 Hz), 100 Hz]``."""
    return (max(2.0 / duration, 0.05), high)


def fit_power_law(
    spectrum: PowerSpectrum,
    f_lo: float | None = None,
    f_hi: float | None = None,
    bins_per_decade: int = DEFAULT_BINS_PER_DECADE,
) -> PowerLawFit:
    """Least-squares line through ``(log10 f, log10 S)`` of the log-binned
    spectrum inside ``[f_lo, f_hi]``.

    A raw spectrum is cut to the band and then log-binned; an already binned
    one is only cut. Bins with nonpositive power are dropped. Raises
    :class:`BandError` when fewer than 8 bins remain.
    """
    if f_lo is None or f_hi is None:
        lo, hi = default_fit_band(spectrum.duration) if spectrum.duration > 0 else (0.05, DEFAULT_FIT_HIGH)
        f_lo = lo if f_lo is None else f_lo
        f_hi = hi if f_hi is None else f_hi
    if not 0 < f_lo < f_hi:
        raise BandError(f"invalid fit band [{f_lo}, {f_hi}]")
    f = spectrum.frequencies
    sel = (f >= f_lo) & (f <= f_hi)
    cut = replace_arrays(spectrum, f[sel], spectrum.power[sel], bins_per_decade)
    binned = cut if spectrum.binned else log_bin(cut, bins_per_decade)
    good = binned.power > 0
    x = np.log10(binned.frequencies[good])
    y = np.log10(binned.power[good])
    if x.size < MIN_FIT_POINTS:
        raise BandError(
            f"only {x.size} usable log-binned points in [{f_lo:g}, {f_hi:g}] Hz; need {MIN_FIT_POINTS}"
        )
    xm, ym = x.mean(), y.mean()
    dx, dy = x - xm, y - ym
    sxx = float(dx @ dx)
    if sxx == 0:
        raise BandError("fit band collapses to a single frequency")
    slope = float(dx @ dy) / sxx
    intercept = ym - slope * xm
    ss_tot = float(dy @ dy)
    resid = dy - slope * dx
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(
        index=slope,
        log10_amplitude=float(intercept),
        band=(float(f_lo), float(f_hi)),
        r_squared=float(min(max(r2, 0.0), 1.0)),
        bin_count=int(x.size),
    )


def ubr_ratio(spectrum: PowerSpectrum, low_freq: float = 0.1, high_threshold: float = 100.0) -> UBRRatio:
    """Power in the bin nearest ``low_freq`` over the largest power above
    ``high_threshold``.

    When the spectrum starts above ``low_freq`` (record shorter than
    ``1/low_freq``) the lowest bin is used and the result is flagged.
    """
    f = spectrum.frequencies
    p = spectrum.power
    i = int(np.argmin(np.abs(f - low_freq)))
    flagged = bool(abs(f[i] - low_freq) > 0.5 * spectrum.resolution) if spectrum.resolution else False
    high = f > high_threshold
    if not high.any():
        raise BandError(f"spectrum has no bins above {high_threshold} Hz")
    j = int(np.flatnonzero(high)[np.argmax(p[high])])
    peak = p[j]
    value = float(p[i] / peak) if peak > 0 else float("inf") if p[i] > 0 else 0.0
    return UBRRatio(
        value=value,
        low_freq=low_freq,
        high_threshold=high_threshold,
        low_bin_freq=float(f[i]),
        high_peak_freq=float(f[j]),
        flagged=flagged,
    )


def zero_crossings(signal: TimeSeries) -> TimeSeries:
    """Event series with 1 where the sign differs from the previous sample.

    Zero counts as nonnegative; the first sample is always 0.
    """
    neg = signal.samples < 0
    out = np.zeros(neg.size)
    out[1:] = neg[1:] != neg[:-1]
    return TimeSeries(out, signal.sample_rate)


@dataclass(frozen=True, eq=False)
class Analysis:
    spectrum: PowerSpectrum
    fit: PowerLawFit | None
    ratio: UBRRatio
    fit_error: str | None = None
    extras: dict = field(default_factory=dict)


def analyze_signal(
    signal: TimeSeries,
    band: tuple[float, float] | None = None,
    window: str = "none",
    bins_per_decade: int = DEFAULT_BINS_PER_DECADE,
    low_freq: float = 0.1,
    high_threshold: float = 100.0,
    strict: bool = False,
) -> Analysis:
    """Square, transform, fit and compute the ratio in one call.

    A fit failure is recorded in ``fit_error`` unless ``strict`` is set.
    """
    spec = periodogram(square_signal(signal), window=window)
    lo, hi = band if band is not None else default_fit_band(spec.duration)
    try:
        fit = fit_power_law(spec, lo, hi, bins_per_decade)
        err = None
    except BandError as exc:
        if strict:
            raise
        fit, err = None, str(exc)
    ratio = ubr_ratio(spec, low_freq, high_threshold)
    return Analysis(spec, fit, ratio, err)
