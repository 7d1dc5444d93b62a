"""Registry of the reference figure experiments.

Each entry carries the reference parameter list verbatim in
``parameters_note`` so the code can be reviewed against it.
"""

from __future__ import annotations

from dataclasses import replace

from ..stochastics import IRDivergentSpec
from ..synth.melody import DEFAULT_MELODY
from ..synth.specs import EnsembleSpec, ResonanceSpec, TimbreSpec, VibratoSpec
from .config import AnalysisParams, ExperimentConfig, MelodyParams, SegmentParams

DEFAULT_REPS = 5

VIOLIN_TIMBRE_30 = TimbreSpec(overtone_count=30, spectral_slope=-0.7)
VIOLIN_VIBRATO = VibratoSpec(base_depth=2.0, depth_jitter=1.0, rate_lo=-1.0, rate_hi=10.0)


def _timbre_unison(name, n, note):
    return ExperimentConfig(
        kind="timbre-unison", name=name, reps=DEFAULT_REPS,
        ensemble=EnsembleSpec(440.0, n, 3.0, 10.0, timbre=VIOLIN_TIMBRE_30),
        parameters_note=note,
    )


def _vibrato_unison(name, n, note):
    return ExperimentConfig(
        kind="vibrato-unison", name=name, reps=DEFAULT_REPS,
        ensemble=EnsembleSpec(440.0, n, 6.0, 10.0, vibrato=VIOLIN_VIBRATO),
        parameters_note=note,
    )


def _combined(name, n, m, xi, tau, note, fit_lo=None):
    return ExperimentConfig(
        kind="combined", name=name, reps=DEFAULT_REPS,
        ensemble=EnsembleSpec(440.0, n, xi, tau, timbre=TimbreSpec(m, -0.7), vibrato=VIOLIN_VIBRATO),
        analysis=AnalysisParams(fit_lo=fit_lo),
        parameters_note=note,
    )


def _melody(name, overlap, note):
    return ExperimentConfig(
        kind="melody", name=name, reps=DEFAULT_REPS,
        ensemble=EnsembleSpec(440.0, 1, 3.0, 1.0, timbre=TimbreSpec(10, -0.7)),
        melody=MelodyParams(DEFAULT_MELODY, note_duration=1.0, overlap_fraction=overlap),
        parameters_note=note,
    )


def _resonance(name, xi, timbre, mu, note):
    return ExperimentConfig(
        kind="resonance", name=name, reps=DEFAULT_REPS,
        ensemble=EnsembleSpec(440.0, 10, xi, 10.0, timbre=timbre),
        resonance=ResonanceSpec(coupling=10.0, dissipation=mu, timbre=timbre),
        parameters_note=note,
    )


_FIG6_SEGMENTS = dict(
    kind="segments", reps=DEFAULT_REPS,
    ensemble=EnsembleSpec(4400.0, 4096, 0.0, 1.0),
    ir=IRDivergentSpec(epsilon=1e-5, kappa_max=12400.0),
)

PRESETS: dict[str, ExperimentConfig] = {
    "fig1a": _timbre_unison("fig1a", 1, "ω=440,−3<ξ(random)<3,β=−0.7,τ=10,M=30,N=1"),
    "fig1b": _timbre_unison("fig1b", 5, "ω=440,−3<ξ(random)<3,β=−0.7,τ=10,M=30; N=5"),
    "fig1c": _timbre_unison("fig1c", 10, "ω=440,−3<ξ(random)<3,β=−0.7,τ=10,M=30; N=10"),
    "fig2a": _vibrato_unison("fig2a", 1, "ω=440,b=2+(−1<random<1),−1<θ(random)<10,−6<ξ(random)<6,τ=10,N=1"),
    "fig2b": _vibrato_unison("fig2b", 5, "ω=440,b=2+(−1<random<1),−1<θ(random)<10,−6<ξ(random)<6,τ=10,N=5"),
    "fig2c": _vibrato_unison("fig2c", 10, "ω=440,b=2+(−1<random<1),−1<θ(random)<10,−6<ξ(random)<6,τ=10,N=10"),
    "fig3a": _combined("fig3a", 5, 5, 1.0, 10.0, "ω=440,−1<ξ(random)<1,β=−0.7,τ=10,M=5,N=5 (vibrato as fig2)"),
    "fig3b": _combined("fig3b", 10, 10, 1.0, 10.0, "ω=440,−1<ξ(random)<1,β=−0.7,τ=10,M=10,N=10 (vibrato as fig2)"),
    "fig3c": _combined(
        "fig3c", 10, 10, 0.1, 100.0,
        "ω=440,−0.1<ξ(random)<0.1,β=−0.7,τ=100,M=10,N=10 (vibrato as fig2); fit from the 0.01 Hz bin",
        fit_lo=0.01,
    ),
    "fig4a": _melody("fig4a", 0.0, "la: ω=440,−3<ξ(random)<3,β=−0.7,τ=1,M=10,N=1; overlap 0%"),
    "fig4b": _melody("fig4b", 0.01, "la: ω=440,−3<ξ(random)<3,β=−0.7,τ=1,M=10,N=1; overlap 1%"),
    "fig4c": _melody("fig4c", 0.10, "la: ω=440,−3<ξ(random)<3,β=−0.7,τ=1,M=10,N=1; overlap 10%"),
    "fig5a": _resonance("fig5a", 10.0, None, 0.0, "ω=440,λ=10,ξ∈[−10,10],N=10,τ=10"),
    "fig5b": _resonance("fig5b", 3.0, TimbreSpec(5, -0.7), 0.0, "ω=440,λ=10,ξ∈[−3,3],N=10,M=5,τ=10,β=−0.7"),
    "fig5c": _resonance("fig5c", 3.0, TimbreSpec(5, -0.7), 10.0, "ω=440,λ=10,ξ∈[−3,3],N=10,M=5,τ=10,β=−0.7,μ=10"),
    "fig6a": ExperimentConfig(
        kind="ir-ensemble", name="fig6a", reps=DEFAULT_REPS,
        ensemble=EnsembleSpec(4400.0, 300, 0.0, 10.0),
        ir=IRDivergentSpec(epsilon=1e-5, kappa_max=3000.0),
        parameters_note="ω=4400,−3000<ξ(random)<3000,τ=10,N=300,ε=10⁻⁵",
    ),
    "fig6b": ExperimentConfig(
        name="fig6b", segments=SegmentParams(100, 0.0),
        parameters_note="100 segments; ω=4400,−12400<κ(IR-div)<12400,τ=1,N=4096,ε=10⁻⁵",
        **_FIG6_SEGMENTS,
    ),
    "fig6c": ExperimentConfig(
        name="fig6c", segments=SegmentParams(100, 0.5),
        parameters_note="as fig6b with adjacent segments 50% superposed",
        **_FIG6_SEGMENTS,
    ),
}


def get_preset(name: str, seed: int | None = None, reps: int | None = None) -> ExperimentConfig:
    try:
        config = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}") from None
    if seed is not None:
        config = replace(config, seed=seed)
    if reps is not None:
        config = replace(config, reps=reps)
    return config
