"""Parameter records for the generators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from ..errors import ParameterError
from ..series import DEFAULT_SAMPLE_RATE
from ..stochastics import SeedTree


def check_nyquist(freq: float, sample_rate: float, what: str) -> None:
    nyquist = sample_rate / 2.0
    if abs(freq) >= nyquist:
        raise ParameterError(f"{what} at {abs(freq):.6g} Hz reaches the Nyquist limit {nyquist:.6g} Hz")


@dataclass(frozen=True)
class TimbreSpec:
    """Overtone stack: ``overtone_count`` harmonics weighted ``m**spectral_slope``.

    With ``per_overtone_phase`` each harmonic gets its own random phase instead
    of sharing the source phase.
    """

    overtone_count: int = 30
    spectral_slope: float = -0.7
    per_overtone_phase: bool = False

    def __post_init__(self):
        if int(self.overtone_count) != self.overtone_count or self.overtone_count < 1:
            raise ParameterError(f"overtone_count must be an integer >= 1, got {self.overtone_count}")
        if not np.isfinite(self.spectral_slope):
            raise ParameterError("spectral_slope must be finite")

    def weights(self) -> np.ndarray:
        m = np.arange(1, self.overtone_count + 1, dtype=float)
        return m**self.spectral_slope


@dataclass(frozen=True)
class VibratoSpec:
    """Per-source vibrato: depth ``base_depth +- depth_jitter`` Hz, rate uniform
    in ``[rate_lo, rate_hi]`` Hz. Negative rates are allowed."""

    base_depth: float = 2.0
    depth_jitter: float = 1.0
    rate_lo: float = -1.0
    rate_hi: float = 10.0

    def __post_init__(self):
        if self.base_depth < 0:
            raise ParameterError(f"base_depth must be >= 0, got {self.base_depth}")
        if self.depth_jitter < 0:
            raise ParameterError(f"depth_jitter must be >= 0, got {self.depth_jitter}")
        if self.rate_lo > self.rate_hi:
            raise ParameterError(f"rate_lo {self.rate_lo} exceeds rate_hi {self.rate_hi}")

    @property
    def max_depth(self) -> float:
        return self.base_depth + self.depth_jitter


@dataclass(frozen=True)
class EnsembleSpec:
    """A unison of ``source_count`` detuned copies of one voice.

    Detunes are uniform in ``+-detune_halfwidth`` Hz around ``fiducial_freq``.
    ``timbre`` and ``vibrato`` are optional; which generator applies depends
    on which of them is present.
    """

    fiducial_freq: float = 440.0
    source_count: int = 1
    detune_halfwidth: float = 3.0
    duration: float = 10.0
    sample_rate: float = DEFAULT_SAMPLE_RATE
    timbre: Optional[TimbreSpec] = None
    vibrato: Optional[VibratoSpec] = None
    seed: SeedTree = field(default_factory=lambda: SeedTree(0))

    def __post_init__(self):
        if not self.fiducial_freq > 0:
            raise ParameterError(f"fiducial_freq must be positive, got {self.fiducial_freq}")
        if int(self.source_count) != self.source_count or self.source_count < 1:
            raise ParameterError(f"source_count must be an integer >= 1, got {self.source_count}")
        if self.detune_halfwidth < 0:
            raise ParameterError(f"detune_halfwidth must be >= 0, got {self.detune_halfwidth}")
        if not self.sample_rate > 0:
            raise ParameterError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.n_samples < 1:
            raise ParameterError(f"duration {self.duration} s yields no samples")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.sample_rate))

    def check_nyquist(self) -> None:
        """Raise naming the first overtone whose top frequency is not representable."""
        top = self.fiducial_freq + self.detune_halfwidth
        if self.vibrato is not None:
            top += self.vibrato.max_depth
        count = self.timbre.overtone_count if self.timbre is not None else 1
        for m in range(1, count + 1):
            check_nyquist(m * top, self.sample_rate, f"overtone m={m} (top frequency)")


@dataclass(frozen=True)
class ResonanceSpec:
    """Forced-oscillator resonance added to each detuned source.

    ``coupling`` is the forcing strength and ``dissipation`` the damping; with
    zero damping a drawn detune must keep the resonance denominator away from
    zero. ``singularity_tolerance`` (Hz) is then the minimum accepted
    ``|detune|``; ``None`` means the relative rule
    ``|(w+xi)^2 - w^2| >= 1e-3 w^2``.

    ``random_phase`` gives each free oscillation the source's random phase;
    off by default so the free term starts at zero phase.
    """

    coupling: float = 10.0
    dissipation: float = 0.0
    timbre: Optional[TimbreSpec] = None
    singularity_tolerance: Optional[float] = None
    random_phase: bool = False
    max_resample: int = 100

    def __post_init__(self):
        if not np.isfinite(self.coupling):
            raise ParameterError("coupling must be finite")
        if self.dissipation < 0:
            raise ParameterError(f"dissipation must be >= 0, got {self.dissipation}")
        if self.singularity_tolerance is not None and not self.singularity_tolerance > 0:
            raise ParameterError("singularity_tolerance must be positive")


@dataclass(frozen=True)
class MelodySpec:
    """Sequence of solfège notes played one after another with overlap.

    Each note is synthesized from ``note_template`` (a single-source timbre
    ensemble) retuned to the note pitch; ``note_duration`` overrides the
    template duration. ``solfege`` optionally replaces the pitch table.
    """

    notes: tuple[str, ...]
    note_duration: float = 1.0
    overlap_fraction: float = 0.0
    reference_pitch: float = 440.0
    note_template: EnsembleSpec = field(
        default_factory=lambda: EnsembleSpec(
            fiducial_freq=440.0, source_count=1, detune_halfwidth=3.0, duration=1.0,
            timbre=TimbreSpec(overtone_count=10, spectral_slope=-0.7),
        )
    )
    seed: SeedTree = field(default_factory=lambda: SeedTree(0))
    solfege: Optional[Mapping[str, int]] = None

    def __post_init__(self):
        object.__setattr__(self, "notes", tuple(self.notes))
        if not self.notes:
            raise ParameterError("a melody needs at least one note")
        if not self.note_duration > 0:
            raise ParameterError("note_duration must be positive")
        if not 0.0 <= self.overlap_fraction <= 0.9:
            raise ParameterError(f"overlap_fraction must lie in [0, 0.9], got {self.overlap_fraction}")
        if not self.reference_pitch > 0:
            raise ParameterError("reference_pitch must be positive")
        if self.note_template.source_count != 1:
            raise ParameterError("melody notes are single-source (source_count = 1)")
