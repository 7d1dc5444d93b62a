import warnings
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from ubr.errors import DegenerateParameterError, ParameterError
from ubr.series import TimeSeries
from ubr.spectral import periodogram, square_signal, ubr_ratio
from ubr.stochastics import IRDivergentSpec, SeedTree
from ubr.synth import (
    DEFAULT_MELODY,
    EnsembleSpec,
    MelodySpec,
    ResonanceSpec,
    TimbreSpec,
    VibratoSpec,
    build_melody,
    concat_segments,
    note_pitch,
    sine_bank,
    synth_ir_ensemble,
    synth_resonance,
    synth_timbre_note,
    synth_timbre_source,
    synth_unison_timbre,
    synth_unison_timbre_vibrato,
    synth_unison_vibrato,
    vibrato_phase,
)
from ubr.synth.melody import melody_length, overlap_add
from ubr.synth.unison import draw_resonance_source, resonance_amplitude

FS = 44100.0


def test_timeseries_duration_and_readonly():
    ts = TimeSeries(np.zeros(44100), FS)
    assert ts.duration == 1.0
    with pytest.raises(ValueError):
        ts.samples[0] = 1.0


@pytest.mark.parametrize("bad", [dict(samples=np.zeros(0)), dict(sample_rate=0.0)])
def test_timeseries_invariants(bad):
    kw = dict(samples=np.zeros(4), sample_rate=FS) | bad
    with pytest.raises(ParameterError):
        TimeSeries(**kw)


# sine bank

@settings(max_examples=20, deadline=None)
@given(
    freqs=st.lists(st.floats(-20000, 20000), min_size=1, max_size=12),
    n=st.integers(16, 3000),
    seed=st.integers(0, 1000),
)
def test_fft_bank_matches_direct(freqs, n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=len(freqs))
    p = rng.uniform(-np.pi, np.pi, len(freqs))
    direct = sine_bank(freqs, a, p, n, FS, "direct")
    fast = sine_bank(freqs, a, p, n, FS, "fft")
    scale = np.abs(a).sum()
    assert np.max(np.abs(direct - fast)) <= 1e-9 * scale


def test_fft_bank_large_grid():
    rng = np.random.default_rng(1)
    f = rng.uniform(-15000, 15000, 200)
    a = rng.normal(size=200)
    p = rng.uniform(-np.pi, np.pi, 200)
    n = 441000
    direct = sine_bank(f, a, p, n, FS, "direct")
    fast = sine_bank(f, a, p, n, FS, "fft")
    assert np.max(np.abs(direct - fast)) < 1e-9 * np.abs(a).sum()


# timbre

def test_single_overtone_is_pure_sine():
    ts = synth_timbre_note(440.0, TimbreSpec(1, -0.7), 0.0, 44100, FS)
    np.testing.assert_allclose(ts.samples, np.sin(2 * np.pi * 440 * ts.times()), atol=1e-12)
    spec = periodogram(ts)
    assert spec.frequencies[np.argmax(spec.power)] == 440.0


def test_two_flat_overtones_identity():
    ts = synth_timbre_note(440.0, TimbreSpec(2, 0.0), 0.0, 4410, FS, method="direct")
    t = ts.times()
    np.testing.assert_allclose(ts.samples, np.sin(2 * np.pi * 440 * t) + np.sin(4 * np.pi * 440 * t), atol=1e-12)


def test_harmonic_amplitudes_follow_slope():
    ts = synth_timbre_note(440.0, TimbreSpec(30, -0.7), 0.4, 44100, FS)
    spec = periodogram(ts)
    m = np.arange(1, 31)
    # tau = 1 s puts every harmonic on an exact bin (index m*440 - 1 with DC dropped)
    amp = np.sqrt(spec.power[m * 440 - 1])
    np.testing.assert_allclose(amp / amp[0], m**-0.7, rtol=0.05)


def test_per_overtone_phases():
    spec = EnsembleSpec(440, 2, 3.0, 0.1, timbre=TimbreSpec(5, -0.7, per_overtone_phase=True), seed=SeedTree(1))
    a = synth_unison_timbre(spec)
    b = synth_unison_timbre(replace(spec, timbre=TimbreSpec(5, -0.7)))
    assert not np.allclose(a.samples, b.samples)


def test_unison_is_sum_of_sources():
    spec = EnsembleSpec(440, 5, 3.0, 0.5, timbre=TimbreSpec(30, -0.7), seed=SeedTree(4))
    whole = synth_unison_timbre(spec, method="direct").samples
    parts = sum(synth_timbre_source(spec, s, method="direct").samples for s in range(5))
    assert np.max(np.abs(whole - parts)) <= 1e-12 * np.max(np.abs(whole))
    fast = synth_unison_timbre(spec, method="fft").samples
    assert np.max(np.abs(fast - whole)) <= 1e-9 * np.max(np.abs(whole))


def test_nyquist_guard_names_overtone():
    # with detune the top of overtone 50 is 50 * 443 = 22150 Hz
    spec = EnsembleSpec(440, 1, 3.0, 0.1, timbre=TimbreSpec(60, -0.7))
    with pytest.raises(ParameterError, match="overtone m=50"):
        synth_unison_timbre(spec)
    with pytest.raises(ParameterError, match="overtone m=51"):
        synth_timbre_note(440.0, TimbreSpec(60, -0.7), 0.0, 100, FS)


def test_deterministic_regeneration():
    spec = EnsembleSpec(440, 5, 3.0, 1.0, timbre=TimbreSpec(30, -0.7), seed=SeedTree(3).child("rep", 0))
    np.testing.assert_array_equal(synth_unison_timbre(spec).samples, synth_unison_timbre(spec).samples)


# vibrato

def test_vibrato_phase_trivial_cases():
    assert vibrato_phase(440, 5, 2, 0.3, 0.0) == 0.0
    t = np.linspace(0, 3, 101)
    np.testing.assert_array_equal(vibrato_phase(440, 5, 0.0, 0.3, t), 2 * np.pi * 440 * t)


def _quad_phase(w, theta, b, eta, t):
    f = lambda s: 2 * np.pi * (w + b * np.sin(2 * np.pi * theta * s + eta))
    # the requested tolerance sits at float64 rounding, so quad warns; the
    # assertion below is the real check
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, 0.0, t, limit=500, epsabs=1e-12, epsrel=1e-14)
    return val


def test_vibrato_phase_reference_point():
    assert abs(vibrato_phase(440, 5, 2, 0.3, 1.7) - _quad_phase(440, 5, 2, 0.3, 1.7)) < 1e-8


def test_vibrato_phase_random_draws():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        w, theta, b = rng.uniform(100, 1000), rng.uniform(-1, 10), rng.uniform(0, 3)
        eta, t = rng.uniform(-np.pi, np.pi), rng.uniform(0, 10)
        assert abs(vibrato_phase(w, theta, b, eta, t) - _quad_phase(w, theta, b, eta, t)) < 1e-8


def test_vibrato_small_rate_limit():
    t = np.linspace(0, 5, 11)
    limit = vibrato_phase(440, 0.0, 2.0, 0.7, t)
    near = vibrato_phase(440, 1e-5, 2.0, 0.7, t)
    # next order of the expansion in theta
    correction = 2 * np.pi**2 * 2.0 * 1e-5 * t**2 * np.cos(0.7)
    np.testing.assert_allclose(near - limit, correction, atol=1e-6)
    np.testing.assert_allclose(limit, 2 * np.pi * 440 * t + 2 * np.pi * 2 * t * np.sin(0.7))


def test_vibrato_unison_single_source_no_ubr():
    spec = EnsembleSpec(440, 1, 6.0, 10.0, vibrato=VibratoSpec(), seed=SeedTree(0).child("rep", 0))
    assert ubr_ratio(periodogram(square_signal(synth_unison_vibrato(spec)))).value < 1e-2


def test_combined_without_vibrato_matches_timbre():
    base = EnsembleSpec(440, 3, 1.0, 0.5, timbre=TimbreSpec(5, -0.7), seed=SeedTree(6))
    still = replace(base, vibrato=VibratoSpec(0.0, 0.0, -1.0, 10.0))
    a = synth_unison_timbre_vibrato(still).samples
    b = synth_unison_timbre(base, method="direct").samples
    np.testing.assert_allclose(a, b, atol=1e-9)


# melody

@pytest.mark.parametrize("token,hz", [("la", 440.0), ("re", 587.33), ("♯so", 415.30), ("#fa", 369.99), ("♮si", 493.88)])
def test_note_pitch(token, hz):
    assert note_pitch(token) == pytest.approx(hz, abs=0.005)


def test_note_pitch_custom_table_and_unknown():
    assert note_pitch("la", 442.0) == 442.0
    assert note_pitch("do", table={"do": -9}) == pytest.approx(440 * 2 ** (-9 / 12))
    with pytest.raises(ParameterError):
        note_pitch("xx")


def test_default_melody_has_sixteen_notes():
    assert len(DEFAULT_MELODY) == 16


@pytest.mark.parametrize("overlap,seconds", [(0.0, 16.0), (0.1, 14.5), (0.01, 15.85)])
def test_melody_duration(overlap, seconds):
    spec = MelodySpec(DEFAULT_MELODY, 1.0, overlap, note_template=EnsembleSpec(440, 1, 3.0, 1.0, timbre=TimbreSpec(3, -0.7)))
    ts = build_melody(spec)
    assert len(ts) == round(seconds * FS) == melody_length(16, 44100, overlap)


def test_overlap_add_is_plain_sum():
    out = overlap_add([np.ones(10), np.ones(10)], 0.5)
    np.testing.assert_array_equal(out, [1] * 5 + [2] * 5 + [1] * 5)


def test_melody_rejects_bad_overlap():
    with pytest.raises(ParameterError):
        MelodySpec(DEFAULT_MELODY, 1.0, 0.95)
    with pytest.raises(ParameterError):
        MelodySpec((), 1.0, 0.0)


def test_concat_segments_durations():
    seg = TimeSeries(np.zeros(44100), FS)
    assert concat_segments([seg] * 100, 0.0).duration == 100.0
    assert concat_segments([seg] * 100, 0.5).duration == 50.5
    with pytest.raises(ParameterError):
        concat_segments([seg, TimeSeries(np.zeros(48000), 48000.0)], 0.0)


# resonance

def test_resonance_without_coupling_is_plain_unison():
    spec = EnsembleSpec(440, 10, 3.0, 0.5, seed=SeedTree(8))
    res = synth_resonance(spec, ResonanceSpec(coupling=0.0, random_phase=True), method="direct")
    plain = synth_unison_timbre(replace(spec, timbre=TimbreSpec(1, -0.7)), method="direct")
    np.testing.assert_allclose(res.samples, plain.samples, atol=1e-12)


def test_damped_resonance_finite_at_zero_detune():
    amp = resonance_amplitude(440.0, 0.0, 1, 10.0, 10.0)
    assert np.isfinite(amp)
    assert amp == pytest.approx(10.0 / (2 * 10.0 * 440.0))
    spec = EnsembleSpec(440, 10, 0.0, 0.2, seed=SeedTree(0))
    out = synth_resonance(spec, ResonanceSpec(10.0, 10.0, TimbreSpec(5, -0.7)))
    assert np.all(np.isfinite(out.samples))


def test_undamped_resonance_avoids_singularity():
    spec = EnsembleSpec(440, 50, 3.0, 0.1, seed=SeedTree(2))
    res = ResonanceSpec(10.0, 0.0)
    for s in range(50):
        xi = draw_resonance_source(spec, res, s).detune
        assert abs((440 + xi) ** 2 - 440**2) >= 1e-3 * 440**2


def test_undamped_resonance_degenerate_range():
    spec = EnsembleSpec(440, 1, 0.0, 0.1)
    with pytest.raises(DegenerateParameterError):
        synth_resonance(spec, ResonanceSpec(10.0, 0.0))


# IR-divergent ensemble

def test_ir_single_source_no_ubr():
    spec = EnsembleSpec(4400, 1, 0.0, 10.0, seed=SeedTree(0))
    out = synth_ir_ensemble(spec, IRDivergentSpec(1e-5, 3000.0))
    assert ubr_ratio(periodogram(square_signal(out))).value < 1e-2


def test_ir_segment_preset_valid():
    spec = EnsembleSpec(4400, 4096, 0.0, 1.0, seed=SeedTree(0))
    out = synth_ir_ensemble(spec, IRDivergentSpec(1e-5, 12400.0))
    assert len(out) == 44100 and np.all(np.isfinite(out.samples))


def test_ir_nyquist_guard():
    with pytest.raises(ParameterError):
        synth_ir_ensemble(EnsembleSpec(20000, 2, 0.0, 0.1), IRDivergentSpec(1e-5, 3000.0))
