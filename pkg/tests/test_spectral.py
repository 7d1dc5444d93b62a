import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ubr.errors import BandError, ParameterError
from ubr.series import TimeSeries
from ubr.spectral import (
    PowerSpectrum,
    analyze_signal,
    default_fit_band,
    fit_power_law,
    log_bin,
    periodogram,
    square_signal,
    total_power,
    ubr_ratio,
    zero_crossings,
)

FS = 44100.0


def sine(freq, seconds=1.0, phase=0.0):
    t = np.arange(int(round(seconds * FS))) / FS
    return TimeSeries(np.sin(2 * np.pi * freq * t + phase), FS)


def curve(fn, n=200_000, df=0.1):
    """A fake unbinned spectrum on a uniform grid."""
    f = df * np.arange(1, n + 1)
    return PowerSpectrum(f, fn(f), resolution=df, duration=1 / df, n_samples=2 * n)


def test_square_trivial():
    np.testing.assert_array_equal(square_signal(TimeSeries(np.zeros(8), FS)).samples, 0.0)
    np.testing.assert_array_equal(square_signal(TimeSeries(np.full(8, 2.0), FS)).samples, 4.0)


def test_squared_sine_lines():
    spec = periodogram(square_signal(sine(440)))
    assert spec.dc_power > 0
    top = spec.frequencies[np.argsort(spec.power)[-1]]
    assert top == 880.0
    rest = np.delete(spec.power, np.argmax(spec.power))
    assert rest.max() < 1e-20 * spec.power.max()


def test_exact_bin_sine_concentration():
    spec = periodogram(sine(440))
    assert spec.frequencies[0] == 1.0 and spec.dc_dropped
    assert spec.power.max() / spec.power.sum() >= 0.999
    assert np.all(spec.power >= 0)


@settings(max_examples=20, deadline=None)
@given(n=st.integers(16, 5000), seed=st.integers(0, 10_000))
def test_parseval(n, seed):
    x = np.random.default_rng(seed).normal(size=n)
    spec = periodogram(TimeSeries(x, FS))
    assert total_power(spec) == pytest.approx(float(x @ x), rel=1e-9)


def test_time_reversal_invariance():
    x = np.random.default_rng(3).normal(size=4096)
    a = periodogram(TimeSeries(x, FS)).power
    b = periodogram(TimeSeries(x[::-1].copy(), FS)).power
    np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-12)


def test_beat_oracle():
    v = TimeSeries(sine(441, 10).samples + sine(439, 10).samples, FS)
    spec = periodogram(square_signal(v))
    low = spec.frequencies < 100
    k = np.argmax(spec.power[low])
    assert spec.frequencies[low][k] == pytest.approx(2.0)
    others = np.delete(spec.power[low], k)
    assert others.max() < 1e-6 * spec.power[low][k]
    strong = set(np.round(spec.frequencies[spec.power > 1e-6 * spec.power.max()], 6))
    assert strong == {2.0, 878.0, 880.0, 882.0}


def test_hann_window_tag_and_short_input():
    spec = periodogram(sine(440), window="hann")
    assert spec.window == "hann" and "sum(w^2)" in spec.normalization
    with pytest.raises(ParameterError):
        periodogram(TimeSeries(np.zeros(8), FS))
    with pytest.raises(ParameterError):
        periodogram(sine(440), window="kaiser")


def test_log_bin_flat():
    binned = log_bin(curve(lambda f: np.full_like(f, 3.0)))
    np.testing.assert_allclose(binned.power, 3.0, rtol=1e-12)
    assert binned.binned


def test_log_bin_inverse_f():
    binned = log_bin(curve(lambda f: 1 / f))
    sel = binned.frequencies > 1.0  # bins holding several grid points
    np.testing.assert_allclose(binned.power[sel], 1 / binned.frequencies[sel], rtol=0.02)


def test_log_bin_pigeonhole():
    f = np.arange(10, 101) * 0.1
    spec = PowerSpectrum(f, np.ones_like(f), resolution=0.1)
    assert len(log_bin(spec, 20)) <= 21  # [1, 10] plus the bin starting at 10
    assert len(log_bin(PowerSpectrum(f[:-1], np.ones(f.size - 1), resolution=0.1), 20)) <= 20


def test_fit_exact_inverse_f():
    fit = fit_power_law(curve(lambda f: 1e3 / f), 0.1, 100)
    assert fit.index == pytest.approx(-1.0, abs=1e-3)
    assert fit.r_squared > 0.9999
    assert fit.bin_count >= 8


def test_fit_constant():
    assert fit_power_law(curve(lambda f: np.full_like(f, 7.0)), 0.1, 100).index == pytest.approx(0.0, abs=1e-3)


@settings(max_examples=25, deadline=None)
@given(scale=st.floats(1e-6, 1e6))
def test_fit_scale_invariance(scale):
    rng = np.random.default_rng(0)
    base = curve(lambda f: f**-1.3 * rng.exponential(size=f.size))
    scaled = PowerSpectrum(base.frequencies, base.power * scale, resolution=0.1, duration=10.0)
    assert abs(fit_power_law(base, 0.2, 100).index - fit_power_law(scaled, 0.2, 100).index) < 1e-12


def test_fit_band_errors():
    spec = curve(lambda f: 1 / f, n=30)
    with pytest.raises(BandError):
        fit_power_law(spec, 1.0, 2.0)
    with pytest.raises(BandError):
        fit_power_law(spec, 5.0, 1.0)
    silent = periodogram(TimeSeries(np.zeros(44100), FS))
    with pytest.raises(BandError):
        fit_power_law(silent, 2.0, 100.0)


def test_default_band():
    assert default_fit_band(10.0) == (0.2, 100.0)
    assert default_fit_band(100.0) == (0.05, 100.0)


def test_ratio_pure_sine():
    r = ubr_ratio(periodogram(square_signal(sine(440, 10))))
    assert r.value < 1e-6 and not r.detected
    assert r.low_bin_freq == pytest.approx(0.1) and r.high_peak_freq == 880.0


def test_ratio_flags_short_record():
    r = ubr_ratio(periodogram(square_signal(sine(440, 1))))
    assert r.flagged and r.low_bin_freq == 1.0


def test_zero_crossings():
    assert zero_crossings(TimeSeries(np.ones(100), FS)).samples.sum() == 0
    n = zero_crossings(sine(100, phase=0.1)).samples.sum()
    assert abs(n - 200) <= 1


def test_analyze_signal_records_fit_error():
    a = analyze_signal(TimeSeries(np.zeros(44100), FS))
    assert a.fit is None and "points" in a.fit_error
    with pytest.raises(BandError):
        analyze_signal(TimeSeries(np.zeros(44100), FS), strict=True)
