"""Experiment configuration and its INI-style file format.

A config file is flat ``key = value`` text split into sections::

    [experiment]   kind, name, seed, reps, emit_wav
    [ensemble]     fiducial_freq, source_count, detune_halfwidth, duration, sample_rate
    [timbre]       overtone_count, spectral_slope, per_overtone_phase
    [vibrato]      base_depth, depth_jitter, rate_lo, rate_hi
    [resonance]    coupling, dissipation, random_phase, singularity_tolerance
    [ir]           epsilon, kappa_max, symmetric
    [melody]       notes, note_duration, overlap_fraction, reference_pitch
    [segments]     count, overlap_fraction
    [wav]          path, channel, start, duration
    [analysis]     fit_lo, fit_hi, bins_per_decade, window, low_freq, high_threshold

A section that is absent leaves the corresponding component unset (no
timbre, no vibrato, ...). Unknown sections or keys are errors.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields, replace
from typing import Optional

from ..errors import ConfigError, ParameterError
from ..stochastics import IRDivergentSpec, SeedTree
from ..synth.melody import DEFAULT_MELODY
from ..synth.specs import EnsembleSpec, MelodySpec, ResonanceSpec, TimbreSpec, VibratoSpec, check_nyquist

KINDS = (
    "timbre-unison",
    "vibrato-unison",
    "combined",
    "melody",
    "resonance",
    "ir-ensemble",
    "segments",
    "wav-analysis",
)


@dataclass(frozen=True)
class AnalysisParams:
    """Fit band (``fit_lo=None`` means ``max(2/tau, 0.05)``), binning, window
    and ratio frequencies."""

    fit_lo: Optional[float] = None
    fit_hi: float = 100.0
    bins_per_decade: int = 20
    window: str = "none"
    low_freq: float = 0.1
    high_threshold: float = 100.0

    def __post_init__(self):
        if self.window not in ("none", "hann"):
            raise ParameterError(f"window must be 'none' or 'hann', got {self.window!r}")
        if self.bins_per_decade < 4:
            raise ParameterError(f"bins_per_decade must be >= 4, got {self.bins_per_decade}")
        if self.fit_lo is not None and not 0 < self.fit_lo < self.fit_hi:
            raise ParameterError(f"fit_lo must lie in (0, fit_hi), got {self.fit_lo}")


@dataclass(frozen=True)
class MelodyParams:
    notes: tuple[str, ...] = DEFAULT_MELODY
    note_duration: float = 1.0
    overlap_fraction: float = 0.0
    reference_pitch: float = 440.0


@dataclass(frozen=True)
class SegmentParams:
    count: int = 100
    overlap_fraction: float = 0.0

    def __post_init__(self):
        if self.count < 1:
            raise ParameterError(f"count must be >= 1, got {self.count}")
        if not 0.0 <= self.overlap_fraction <= 0.9:
            raise ParameterError(f"overlap_fraction must lie in [0, 0.9], got {self.overlap_fraction}")


@dataclass(frozen=True)
class WavSource:
    path: str
    channel: int = 0
    start: float = 0.0
    duration: Optional[float] = None


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to regenerate and analyze one experiment.

    ``ensemble.seed`` is ignored: repetition ``k`` runs on
    ``SeedTree(seed).child("rep", k)``.
    """

    kind: str
    name: str = "custom"
    seed: int = 0
    reps: int = 1
    emit_wav: bool = False
    ensemble: EnsembleSpec = field(default_factory=EnsembleSpec)
    resonance: Optional[ResonanceSpec] = None
    ir: Optional[IRDivergentSpec] = None
    melody: Optional[MelodyParams] = None
    segments: Optional[SegmentParams] = None
    wav: Optional[WavSource] = None
    analysis: AnalysisParams = field(default_factory=AnalysisParams)
    parameters_note: str = ""

    def rep_seed(self, rep: int) -> SeedTree:
        return SeedTree(self.seed).child("rep", rep)

    def melody_spec(self, seed: SeedTree) -> MelodySpec:
        m = self.melody or MelodyParams()
        template = replace(self.ensemble, duration=m.note_duration, source_count=1)
        return MelodySpec(
            notes=m.notes,
            note_duration=m.note_duration,
            overlap_fraction=m.overlap_fraction,
            reference_pitch=m.reference_pitch,
            note_template=template,
            seed=seed,
        )


def validate(config: ExperimentConfig) -> ExperimentConfig:
    """Check the generator preconditions for ``config.kind``.

    Raises :class:`ConfigError` naming the offending field.
    """
    kind = config.kind
    if kind not in KINDS:
        raise ConfigError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}", field="experiment.kind")
    if config.reps < 1:
        raise ConfigError("reps must be >= 1", field="experiment.reps")
    ens = config.ensemble
    try:
        if kind in ("timbre-unison", "combined", "melody") and ens.timbre is None:
            raise ConfigError(f"kind {kind!r} needs a [timbre] section", field="timbre")
        if kind in ("vibrato-unison", "combined") and ens.vibrato is None:
            raise ConfigError(f"kind {kind!r} needs a [vibrato] section", field="vibrato")
        if kind == "resonance" and config.resonance is None:
            raise ConfigError("kind 'resonance' needs a [resonance] section", field="resonance")
        if kind in ("ir-ensemble", "segments") and config.ir is None:
            raise ConfigError(f"kind {kind!r} needs an [ir] section", field="ir")
        if kind == "wav-analysis" and config.wav is None:
            raise ConfigError("kind 'wav-analysis' needs a [wav] section", field="wav")
        if kind in ("timbre-unison", "vibrato-unison", "combined"):
            probe = ens if kind != "vibrato-unison" else replace(ens, timbre=None)
            probe.check_nyquist()
        elif kind == "melody":
            from ..synth.melody import note_pitch

            m = config.melody or MelodyParams()
            for token in m.notes:
                try:
                    pitch = note_pitch(token, m.reference_pitch)
                except ParameterError as exc:
                    raise ConfigError(str(exc), field="melody.notes") from None
                replace(ens, fiducial_freq=pitch, duration=m.note_duration).check_nyquist()
            config.melody_spec(SeedTree(config.seed))
        elif kind == "resonance":
            res = config.resonance
            count = res.timbre.overtone_count if res.timbre else 1
            top = ens.fiducial_freq + ens.detune_halfwidth
            for k in range(1, count + 1):
                check_nyquist(k * top, ens.sample_rate, f"overtone m={k} (top frequency)")
        elif kind in ("ir-ensemble", "segments"):
            for f in (ens.fiducial_freq + config.ir.kappa_max, ens.fiducial_freq - config.ir.kappa_max):
                check_nyquist(f, ens.sample_rate, "detuned tone (fiducial +- kappa_max)")
    except ParameterError as exc:
        raise ConfigError(str(exc), field="ensemble") from None
    return config


# ---------------------------------------------------------------- INI format

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return " ".join(value)
    return str(value)


def _section_dict(obj, skip=()) -> dict:
    return {f.name: _fmt(getattr(obj, f.name)) for f in fields(obj) if f.name not in skip and getattr(obj, f.name) is not None}


def to_ini(config: ExperimentConfig) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp["experiment"] = {
        "kind": config.kind,
        "name": config.name,
        "seed": str(config.seed),
        "reps": str(config.reps),
        "emit_wav": _fmt(config.emit_wav),
    }
    cp["ensemble"] = _section_dict(config.ensemble, skip=("timbre", "vibrato", "seed"))
    if config.ensemble.timbre is not None:
        cp["timbre"] = _section_dict(config.ensemble.timbre)
    if config.ensemble.vibrato is not None:
        cp["vibrato"] = _section_dict(config.ensemble.vibrato)
    if config.resonance is not None:
        cp["resonance"] = _section_dict(config.resonance, skip=("timbre", "max_resample"))
        # Resonance overtones share the [timbre] section.
        if config.resonance.timbre is not None and "timbre" not in cp:
            cp["timbre"] = _section_dict(config.resonance.timbre)
    if config.ir is not None:
        cp["ir"] = _section_dict(config.ir)
    if config.melody is not None:
        cp["melody"] = _section_dict(config.melody)
    if config.segments is not None:
        cp["segments"] = _section_dict(config.segments)
    if config.wav is not None:
        cp["wav"] = _section_dict(config.wav)
    cp["analysis"] = _section_dict(config.analysis)
    buf = io.StringIO()
    if config.parameters_note:
        buf.write(f"# reference parameters: {config.parameters_note}\n")
    cp.write(buf)
    return buf.getvalue()


def _convert(section: str, key: str, raw: str, kind):
    where = f"{section}.{key}"
    try:
        if kind is bool:
            v = raw.strip().lower()
            if v in _BOOL_TRUE:
                return True
            if v in _BOOL_FALSE:
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind == "optfloat":
            return None if raw.strip().lower() in ("", "none", "auto") else float(raw)
        if kind == "tokens":
            return tuple(raw.replace(",", " ").split())
        return raw.strip()
    except ValueError:
        raise ConfigError(f"cannot parse {raw!r} as {getattr(kind, '__name__', kind)}", field=where) from None


_SCHEMA = {
    "experiment": {"kind": str, "name": str, "seed": int, "reps": int, "emit_wav": bool},
    "ensemble": {"fiducial_freq": float, "source_count": int, "detune_halfwidth": float,
                 "duration": float, "sample_rate": float},
    "timbre": {"overtone_count": int, "spectral_slope": float, "per_overtone_phase": bool},
    "vibrato": {"base_depth": float, "depth_jitter": float, "rate_lo": float, "rate_hi": float},
    "resonance": {"coupling": float, "dissipation": float, "random_phase": bool, "singularity_tolerance": "optfloat"},
    "ir": {"epsilon": float, "kappa_max": float, "symmetric": bool},
    "melody": {"notes": "tokens", "note_duration": float, "overlap_fraction": float, "reference_pitch": float},
    "segments": {"count": int, "overlap_fraction": float},
    "wav": {"path": str, "channel": int, "start": float, "duration": "optfloat"},
    "analysis": {"fit_lo": "optfloat", "fit_hi": float, "bins_per_decade": int, "window": str,
                 "low_freq": float, "high_threshold": float},
}


def _build(section: str, cls, values: dict):
    try:
        return cls(**values)
    except ParameterError as exc:
        msg = str(exc)
        key = next((k for k in values if msg.startswith(k)), None)
        raise ConfigError(msg, field=f"{section}.{key}" if key else section) from None


def from_ini(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse and validate a config file body."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"syntax error in {line.strip()!r}", line=lineno) from None
    except configparser.Error as exc:
        raise ConfigError(f"syntax error: {exc.message}", line=getattr(exc, "lineno", None)) from None

    parsed: dict[str, dict] = {}
    for section in cp.sections():
        schema = _SCHEMA.get(section)
        if schema is None:
            raise ConfigError(f"unknown section [{section}]", field=section)
        values = {}
        for key, raw in cp.items(section):
            if key not in schema:
                raise ConfigError(f"unknown key {key!r}", field=f"{section}.{key}")
            values[key] = _convert(section, key, raw, schema[key])
        parsed[section] = values

    exp = parsed.get("experiment", {})
    if "kind" not in exp:
        raise ConfigError("missing required key", field="experiment.kind")

    timbre = _build("timbre", TimbreSpec, parsed["timbre"]) if "timbre" in parsed else None
    vibrato = _build("vibrato", VibratoSpec, parsed["vibrato"]) if "vibrato" in parsed else None
    ensemble = _build("ensemble", EnsembleSpec, {**parsed.get("ensemble", {}), "timbre": timbre, "vibrato": vibrato})
    resonance = None
    if "resonance" in parsed:
        resonance = _build("resonance", ResonanceSpec, {**parsed["resonance"], "timbre": timbre})
    melody = _build("melody", MelodyParams, parsed["melody"]) if "melody" in parsed else None
    if melody is not None and not 0.0 <= melody.overlap_fraction <= 0.9:
        raise ConfigError("overlap_fraction must lie in [0, 0.9]", field="melody.overlap_fraction")
    wav = None
    if "wav" in parsed:
        if "path" not in parsed["wav"]:
            raise ConfigError("missing required key", field="wav.path")
        wav = _build("wav", WavSource, parsed["wav"])
    config = ExperimentConfig(
        kind=exp["kind"],
        name=exp.get("name", "custom"),
        seed=exp.get("seed", 0),
        reps=exp.get("reps", 1),
        emit_wav=exp.get("emit_wav", False),
        ensemble=ensemble,
        resonance=resonance,
        ir=_build("ir", IRDivergentSpec, parsed["ir"]) if "ir" in parsed else None,
        melody=melody,
        segments=_build("segments", SegmentParams, parsed["segments"]) if "segments" in parsed else None,
        wav=wav,
        analysis=_build("analysis", AnalysisParams, parsed.get("analysis", {})),
    )
    return validate(config)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return from_ini(fh.read(), source=str(path))
