"""Ensemble generators: timbre unison, vibrato unison, both combined,
resonance, and IR-divergent detuned ensembles.

Each source ``s`` of an ensemble draws its random parameters from its own
stream ``spec.seed.child("source", s)``, always in the same order (detune,
phase, then any vibrato quantities), so a source does not change when the
ensemble size changes and generators that share a prefix of draws share
sources.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateParameterError, ParameterError
from ..series import TimeSeries
from ..stochastics import IRDivergentSpec, sample_ir_divergent, uniform
from .bank import sine_bank
from .specs import EnsembleSpec, ResonanceSpec, TimbreSpec, check_nyquist

TWO_PI = 2.0 * np.pi
# Below this |rate| the vibrato phase switches to its theta -> 0 limit.
VIBRATO_RATE_EPS = 1e-6
_BLOCK = 16384


@dataclass(frozen=True)
class SourceDraw:
    """Random parameters of one ensemble member."""

    detune: float
    phase: float
    overtone_phases: np.ndarray | None = None
    vibrato_rate: float = 0.0
    vibrato_depth: float = 0.0
    vibrato_phase: float = 0.0


def _source_rng(spec: EnsembleSpec, index: int) -> np.random.Generator:
    return spec.seed.child("source", index).generator()


def draw_source(spec: EnsembleSpec, index: int, vibrato_phase: bool = False) -> SourceDraw:
    rng = _source_rng(spec, index)
    h = spec.detune_halfwidth
    detune = uniform(-h, h, rng)
    phase = uniform(-np.pi, np.pi, rng)
    overtone_phases = None
    if spec.timbre is not None and spec.timbre.per_overtone_phase:
        overtone_phases = rng.uniform(-np.pi, np.pi, spec.timbre.overtone_count)
    if spec.vibrato is None:
        return SourceDraw(detune, phase, overtone_phases)
    vib = spec.vibrato
    rate = uniform(vib.rate_lo, vib.rate_hi, rng)
    depth = vib.base_depth + uniform(-vib.depth_jitter, vib.depth_jitter, rng)
    vphase = uniform(-np.pi, np.pi, rng) if vibrato_phase else phase
    return SourceDraw(detune, phase, overtone_phases, rate, depth, vphase)


def _timbre_tones(freq: float, timbre: TimbreSpec, phase):
    m = np.arange(1, timbre.overtone_count + 1, dtype=float)
    return m * freq, timbre.weights(), np.broadcast_to(np.asarray(phase, dtype=float), m.shape)


def synth_timbre_note(
    fiducial_freq: float,
    timbre: TimbreSpec,
    phase,
    n_samples: int,
    sample_rate: float,
    method: str = "auto",
) -> TimeSeries:
    """One voice with an overtone stack.

    Sample ``i`` is ``sum_m m**beta * sin(2 pi m f t_i + phase)`` with
    ``t_i = i / sample_rate``. ``phase`` is a scalar shared by all overtones
    or an array with one phase per overtone.
    """
    for m in range(1, timbre.overtone_count + 1):
        check_nyquist(m * fiducial_freq, sample_rate, f"overtone m={m}")
    freqs, amps, phases = _timbre_tones(fiducial_freq, timbre, phase)
    return TimeSeries(sine_bank(freqs, amps, phases, n_samples, sample_rate, method), sample_rate)


def _timbre_phase(draw: SourceDraw):
    return draw.overtone_phases if draw.overtone_phases is not None else draw.phase


def synth_timbre_source(spec: EnsembleSpec, index: int, method: str = "auto") -> TimeSeries:
    """Source ``index`` of a timbre unison on its own."""
    if spec.timbre is None:
        raise ParameterError("timbre unison requires a timbre spec")
    spec.check_nyquist()
    d = draw_source(spec, index)
    return synth_timbre_note(
        spec.fiducial_freq + d.detune, spec.timbre, _timbre_phase(d), spec.n_samples, spec.sample_rate, method
    )


def synth_unison_timbre(spec: EnsembleSpec, method: str = "auto") -> TimeSeries:
    """Sum of ``source_count`` detuned overtone stacks, each with its own phase."""
    if spec.timbre is None:
        raise ParameterError("timbre unison requires a timbre spec")
    spec.check_nyquist()
    freqs, amps, phases = [], [], []
    for s in range(spec.source_count):
        d = draw_source(spec, s)
        f, a, p = _timbre_tones(spec.fiducial_freq + d.detune, spec.timbre, _timbre_phase(d))
        freqs.append(f)
        amps.append(a)
        phases.append(p)
    y = sine_bank(np.concatenate(freqs), np.concatenate(amps), np.concatenate(phases),
                  spec.n_samples, spec.sample_rate, method)
    return TimeSeries(y, spec.sample_rate)


def vibrato_phase(fiducial_freq: float, rate: float, depth: float, phase_offset: float, t):
    """Accumulated phase of a tone whose frequency wobbles sinusoidally.

    Closed form of ``int_0^t 2 pi (f + b sin(2 pi theta t' + eta)) dt'``::

        2 b sin(pi theta t) sin(pi theta t + eta) / theta + 2 pi f t

    For ``|theta| < 1e-6`` Hz the removable singularity is replaced by its
    limit ``2 pi b t sin(eta) + 2 pi f t``.
    """
    t = np.asarray(t, dtype=float)
    carrier = TWO_PI * fiducial_freq * t
    if depth == 0.0:
        return carrier
    if abs(rate) < VIBRATO_RATE_EPS:
        return carrier + TWO_PI * depth * t * np.sin(phase_offset)
    x = np.pi * rate * t
    return carrier + 2.0 * depth * np.sin(x) * np.sin(x + phase_offset) / rate


def synth_unison_vibrato(spec: EnsembleSpec) -> TimeSeries:
    """Sum of detuned pure tones, each with its own random vibrato.

    Source phase enters only through the vibrato phase offset; timbre, if
    present on ``spec``, is ignored (see :func:`synth_unison_timbre_vibrato`).
    """
    if spec.vibrato is None:
        raise ParameterError("vibrato unison requires a vibrato spec")
    check_nyquist(spec.fiducial_freq + spec.detune_halfwidth + spec.vibrato.max_depth,
                  spec.sample_rate, "overtone m=1 (top frequency)")
    t = np.arange(spec.n_samples) / spec.sample_rate
    out = np.zeros(spec.n_samples)
    for s in range(spec.source_count):
        d = draw_source(spec, s)
        out += np.sin(vibrato_phase(spec.fiducial_freq + d.detune, d.vibrato_rate, d.vibrato_depth, d.phase, t))
    return TimeSeries(out, spec.sample_rate)


def _timbre_vibrato_block(spec: EnsembleSpec, d: SourceDraw, weights: np.ndarray, t: np.ndarray) -> np.ndarray:
    carrier = vibrato_phase(spec.fiducial_freq + d.detune, d.vibrato_rate, d.vibrato_depth, d.vibrato_phase, t)
    if d.overtone_phases is not None:
        out = np.zeros_like(t)
        for m, (w, p) in enumerate(zip(weights, d.overtone_phases), start=1):
            out += w * np.sin(m * carrier + p)
        return out
    # Shared phase: step exp(i(m Phi + eta)) up the overtones by repeated
    # multiplication, one complex product per overtone instead of one sine.
    # The rounding error grows linearly in m (about 1e-14 at m = 30).
    step = np.exp(1j * carrier)
    z = step * np.exp(1j * d.phase)
    out = weights[0] * z.imag
    for w in weights[1:]:
        z *= step
        out += w * z.imag
    return out


def synth_timbre_vibrato_source(spec: EnsembleSpec, index: int) -> np.ndarray:
    """Source ``index`` of :func:`synth_unison_timbre_vibrato` on its own."""
    return _timbre_vibrato_sum(spec, [draw_source(spec, index, vibrato_phase=True)])


def _timbre_vibrato_sum(spec: EnsembleSpec, draws) -> np.ndarray:
    weights = spec.timbre.weights()
    out = np.empty(spec.n_samples)
    # Cache-sized blocks; sources are summed in index order within each block.
    for i in range(0, spec.n_samples, _BLOCK):
        t = np.arange(i, min(i + _BLOCK, spec.n_samples)) / spec.sample_rate
        acc = _timbre_vibrato_block(spec, draws[0], weights, t)
        for d in draws[1:]:
            acc += _timbre_vibrato_block(spec, d, weights, t)
        out[i : i + t.size] = acc
    return out


def synth_unison_timbre_vibrato(spec: EnsembleSpec) -> TimeSeries:
    """Overtone stacks driven by a vibrato phase.

    Overtone ``m`` of a source is ``m**beta sin(m * Phi(t) + eta)`` where
    ``Phi`` is the vibrato phase of the detuned fundamental. The vibrato
    carries its own random phase offset, drawn after the timbre phase, so
    with zero vibrato depth the output equals :func:`synth_unison_timbre`
    for the same seed.
    """
    if spec.timbre is None or spec.vibrato is None:
        raise ParameterError("timbre+vibrato unison requires both a timbre and a vibrato spec")
    spec.check_nyquist()
    draws = [draw_source(spec, s, vibrato_phase=True) for s in range(spec.source_count)]
    out = _timbre_vibrato_sum(spec, draws)
    return TimeSeries(out, spec.sample_rate)


def _accept_detune(spec: EnsembleSpec, res: ResonanceSpec, xi: float) -> bool:
    if res.dissipation > 0 or res.coupling == 0:
        return True
    if res.singularity_tolerance is not None:
        return abs(xi) >= res.singularity_tolerance
    w = spec.fiducial_freq
    return abs((w + xi) ** 2 - w**2) >= 1e-3 * w**2


def draw_resonance_source(spec: EnsembleSpec, res: ResonanceSpec, index: int) -> SourceDraw:
    rng = _source_rng(spec, index)
    h = spec.detune_halfwidth
    for _ in range(res.max_resample + 1):
        xi = uniform(-h, h, rng)
        if _accept_detune(spec, res, xi):
            break
    else:
        raise DegenerateParameterError(
            f"source {index}: no detune within +-{h} Hz cleared the resonance singularity "
            f"after {res.max_resample} resamples"
        )
    return SourceDraw(xi, uniform(-np.pi, np.pi, rng))


def resonance_amplitude(fiducial_freq: float, detune: float, overtone: int, coupling: float, dissipation: float) -> float:
    """Amplitude of the forced term ``coupling / D`` for overtone ``m``.

    ``D = (m(w+xi))^2 - (m w)^2`` without damping and
    ``sqrt(D^2 + 4 mu^2 (m w)^2)`` with damping ``mu > 0``.
    """
    mw = overtone * fiducial_freq
    den = (overtone * (fiducial_freq + detune)) ** 2 - mw**2
    if dissipation > 0:
        den = np.sqrt(den**2 + 4.0 * dissipation**2 * mw**2)
    if coupling == 0:
        return 0.0
    return coupling / den


def synth_resonance(spec: EnsembleSpec, res: ResonanceSpec, method: str = "auto") -> TimeSeries:
    """Single string with ``source_count`` resonance modes.

    Each mode contributes the forced response at the string frequency plus its
    free oscillation at the detuned frequency; with ``res.timbre`` every
    overtone ``m`` repeats this with weight ``m**beta``.
    """
    timbre = res.timbre
    count = timbre.overtone_count if timbre is not None else 1
    weights = timbre.weights() if timbre is not None else np.ones(1)
    top = spec.fiducial_freq + spec.detune_halfwidth
    check_nyquist(count * top, spec.sample_rate, f"overtone m={count} (top frequency)")

    freqs, amps, phases = [], [], []
    for s in range(spec.source_count):
        d = draw_resonance_source(spec, res, s)
        free_phase = d.phase if res.random_phase else 0.0
        for m in range(1, count + 1):
            w = weights[m - 1]
            freqs += [m * spec.fiducial_freq, m * (spec.fiducial_freq + d.detune)]
            amps += [w * resonance_amplitude(spec.fiducial_freq, d.detune, m, res.coupling, res.dissipation), w]
            phases += [0.0, free_phase]
    y = sine_bank(freqs, amps, phases, spec.n_samples, spec.sample_rate, method)
    return TimeSeries(y, spec.sample_rate)


def draw_ir_ensemble(spec: EnsembleSpec, ir: IRDivergentSpec):
    """Detunes and phases for an IR-divergent ensemble, drawn as two vectors
    from one stream (``spec.seed.child("ir-ensemble")``)."""
    rng = spec.seed.child("ir-ensemble").generator()
    kappa = sample_ir_divergent(ir, rng, spec.source_count)
    eta = rng.uniform(-np.pi, np.pi, spec.source_count)
    return kappa, eta


def synth_ir_ensemble(spec: EnsembleSpec, ir: IRDivergentSpec, method: str = "auto") -> TimeSeries:
    """Sum of phase-randomized sines detuned by IR-divergent offsets."""
    lo = spec.fiducial_freq - ir.kappa_max if ir.symmetric else spec.fiducial_freq
    for f in (spec.fiducial_freq + ir.kappa_max, lo):
        check_nyquist(f, spec.sample_rate, "detuned tone (fiducial +- kappa_max)")
    kappa, eta = draw_ir_ensemble(spec, ir)
    y = sine_bank(spec.fiducial_freq + kappa, 1.0, eta, spec.n_samples, spec.sample_rate, method)
    return TimeSeries(y, spec.sample_rate)
