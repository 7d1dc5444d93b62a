"""Run experiments: generate, analyze, aggregate over repetitions, write outputs.

Output layout for a run named ``NAME`` under ``OUT``::

    OUT/NAME/config.ini          re-runnable configuration
    OUT/NAME/summary.json        per-repetition results and the aggregate
    OUT/NAME/rep_00/spectrum.csv         raw periodogram of the squared signal
    OUT/NAME/rep_00/spectrum_binned.csv  log-binned spectrum used by the fit
    OUT/NAME/rep_00/metadata.json        parameters, seed path, fit, ratio
    OUT/NAME/rep_00/signal.wav           with --emit-wav (peak 0.9, 16 bit)
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .. import __version__
from ..audio_io import clip, peak_scale, read_wav, write_json, write_spectrum_csv, write_wav
from ..series import TimeSeries
from ..spectral import DEFAULT_BINS_PER_DECADE, analyze_signal, default_fit_band, log_bin
from ..stochastics import GENERATOR_NAME, SeedTree
from ..synth.melody import build_melody, concat_segments
from ..synth.unison import (
    synth_ir_ensemble,
    synth_resonance,
    synth_unison_timbre,
    synth_unison_timbre_vibrato,
    synth_unison_vibrato,
)
from .config import AnalysisParams, ExperimentConfig, WavSource, to_ini, validate
from .presets import get_preset


def generate(config: ExperimentConfig, seed: SeedTree) -> TimeSeries:
    """Synthesize (or load) the signal of one repetition."""
    kind = config.kind
    ens = replace(config.ensemble, seed=seed)
    if kind == "timbre-unison":
        return synth_unison_timbre(ens)
    if kind == "vibrato-unison":
        return synth_unison_vibrato(ens)
    if kind == "combined":
        return synth_unison_timbre_vibrato(ens)
    if kind == "melody":
        return build_melody(config.melody_spec(seed))
    if kind == "resonance":
        return synth_resonance(ens, config.resonance)
    if kind == "ir-ensemble":
        return synth_ir_ensemble(ens, config.ir)
    if kind == "segments":
        segs = [
            synth_ir_ensemble(replace(ens, seed=seed.child("segment", i)), config.ir)
            for i in range(config.segments.count)
        ]
        return concat_segments(segs, config.segments.overlap_fraction)
    if kind == "wav-analysis":
        return load_clip(config.wav)
    raise ValueError(f"unknown kind {kind!r}")


def load_clip(src: WavSource) -> TimeSeries:
    signal = read_wav(src.path, src.channel)
    duration = src.duration if src.duration is not None else signal.duration - src.start
    if src.start == 0 and src.duration is None:
        return signal
    return clip(signal, src.start, duration)


def _band(analysis: AnalysisParams, duration: float) -> tuple[float, float]:
    lo, hi = default_fit_band(duration, analysis.fit_hi)
    return (analysis.fit_lo if analysis.fit_lo is not None else lo, hi)


def run_rep(config: ExperimentConfig, rep: int, out_dir: Path | None = None) -> dict:
    """Generate, analyze and optionally write one repetition."""
    seed = config.rep_seed(rep)
    signal = generate(config, seed)
    a = config.analysis
    band = _band(a, signal.duration)
    # A recording that cannot be fitted is an error; a synthetic run without
    # enough low-frequency power is a result (no UBR) and is recorded.
    strict = config.kind == "wav-analysis"
    result = analyze_signal(signal, band, a.window, a.bins_per_decade, a.low_freq, a.high_threshold, strict)
    record = {
        "rep": rep,
        "seed": seed.describe(),
        "n_samples": len(signal),
        "duration_s": signal.duration,
        "sample_rate": signal.sample_rate,
        "fit": result.fit.as_dict() if result.fit else None,
        "fit_error": result.fit_error,
        "ubr_ratio": result.ratio.as_dict(),
        "spectrum": result.spectrum.metadata(),
    }
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        spec = result.spectrum
        write_spectrum_csv(out_dir / "spectrum.csv", spec.frequencies, spec.power)
        binned = log_bin(spec, a.bins_per_decade or DEFAULT_BINS_PER_DECADE)
        write_spectrum_csv(out_dir / "spectrum_binned.csv", binned.frequencies, binned.power)
        if config.emit_wav:
            scale = peak_scale(signal, 0.9)
            write_wav(signal.scaled(scale), out_dir / "signal.wav", bits=16)
            record["wav"] = {"file": "signal.wav", "scale_factor": scale, "bits": 16, "peak": 0.9}
        meta = {
            "experiment": config.name,
            "kind": config.kind,
            "code_version": __version__,
            "generator": GENERATOR_NAME,
            "config_ini": to_ini(replace(config, parameters_note="")),
            **record,
        }
        write_json(out_dir / "metadata.json", meta)
    return record


def aggregate(records: list[dict]) -> dict:
    """Mean, sample standard deviation and standard error of the index, plus
    ratio statistics, over the repetitions that produced a fit."""
    gammas = [r["fit"]["index"] for r in records if r["fit"] is not None]
    r2 = [r["fit"]["r_squared"] for r in records if r["fit"] is not None]
    ratios = [r["ubr_ratio"]["value"] for r in records]
    n = len(gammas)
    agg = {
        "reps": len(records),
        "fitted_reps": n,
        "gamma_values": gammas,
        "gamma_mean": float(np.mean(gammas)) if n else None,
        "gamma_std": float(np.std(gammas, ddof=1)) if n > 1 else None,
        "gamma_sem": float(np.std(gammas, ddof=1) / math.sqrt(n)) if n > 1 else None,
        "r_squared_mean": float(np.mean(r2)) if n else None,
        "ratio_values": ratios,
        "ratio_median": float(np.median(ratios)),
        "ratio_geomean": float(np.exp(np.mean(np.log(ratios)))) if all(v > 0 for v in ratios) else None,
    }
    agg["ubr_detected_reps"] = sum(1 for r in records if r["ubr_ratio"]["ubr_detected"])
    return agg


def _rep_worker(args):
    config, rep, out_dir = args
    return run_rep(config, rep, out_dir)


def run_experiment(config: ExperimentConfig, out: str | Path | None = None, jobs: int = 1) -> dict:
    """Run every repetition of ``config`` and return the summary record.

    Repetitions are independent and may run in ``jobs`` processes; the
    summary is assembled in repetition order regardless.
    """
    validate(config)
    run_dir = Path(out) / config.name if out is not None else None
    if run_dir is not None:
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / "config.ini").write_text(to_ini(config), encoding="utf-8")
    tasks = [(config, k, run_dir / f"rep_{k:02d}" if run_dir else None) for k in range(config.reps)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            records = list(pool.map(_rep_worker, tasks))
    else:
        records = [_rep_worker(t) for t in tasks]
    summary = {
        "experiment": config.name,
        "kind": config.kind,
        "seed": config.seed,
        "code_version": __version__,
        "generator": GENERATOR_NAME,
        "parameters_note": config.parameters_note,
        "analysis": {
            "window": config.analysis.window,
            "bins_per_decade": config.analysis.bins_per_decade,
            "fit_lo": config.analysis.fit_lo,
            "fit_hi": config.analysis.fit_hi,
        },
        "repetitions": records,
        "aggregate": aggregate(records),
    }
    if run_dir is not None:
        write_json(run_dir / "summary.json", summary)
    return summary


def with_overrides(config: ExperimentConfig, seed=None, reps=None, band=None, window=None, emit_wav=None):
    if seed is not None:
        config = replace(config, seed=seed)
    if reps is not None:
        config = replace(config, reps=reps)
    if emit_wav is not None:
        config = replace(config, emit_wav=emit_wav)
    a = config.analysis
    if band is not None:
        a = replace(a, fit_lo=band[0], fit_hi=band[1])
    if window is not None:
        a = replace(a, window=window)
    return replace(config, analysis=a)


def run_preset(name: str, seed: int | None = None, out=None, reps: int | None = None, jobs: int = 1, **overrides) -> dict:
    """Run a named figure preset (see :data:`PRESETS`)."""
    config = with_overrides(get_preset(name), seed=seed, reps=reps, **overrides)
    return run_experiment(config, out, jobs)


def run_config(path, out=None, jobs: int = 1, **overrides) -> dict:
    from .config import load_config

    config = with_overrides(load_config(path), **overrides)
    return run_experiment(config, out, jobs)


def analyze_wav(
    path,
    channel: int = 0,
    start: float = 0.0,
    duration: float | None = None,
    band: tuple[float, float] | None = None,
    window: str = "none",
    out=None,
    name: str | None = None,
) -> dict:
    """Analyze one channel of a WAV recording like a synthetic experiment."""
    config = ExperimentConfig(
        kind="wav-analysis",
        name=name or Path(path).stem,
        wav=WavSource(str(path), channel, start, duration),
        analysis=AnalysisParams(
            fit_lo=band[0] if band else None, fit_hi=band[1] if band else 100.0, window=window
        ),
    )
    return run_experiment(config, out)
