"""Equal-tempered solfège pitches, melodies with overlapping notes, and
overlap-add concatenation of independent segments."""

from __future__ import annotations

import re
from dataclasses import replace
from typing import Mapping, Sequence

import numpy as np

from ..errors import ParameterError
from ..series import TimeSeries
from .specs import MelodySpec
from .unison import synth_unison_timbre

# Semitone offsets from la in fixed-do solfège. Octaves are chosen so the
# default melody stays within a few semitones of la = 440 Hz; entries listed
# here win over the generic natural +- accidental rule.
SOLFEGE_SEMITONES: dict[str, int] = {
    "do": 3,
    "re": 5,
    "mi": 7,
    "fa": 8,
    "so": -2,
    "la": 0,
    "si": 2,
    "#so": -1,
    "#fa": -3,
}

DEFAULT_MELODY = (
    "re", "mi", "fa", "re", "re", "do", "♮si", "la",
    "♯so", "la", "♮si", "la", "so", "♯fa", "mi", "re",
)

_ACCIDENTALS = {"♯": "#", "#": "#", "♭": "b", "b": "b", "♮": "", "n": "", "": ""}
_TOKEN = re.compile(r"^([♯#♭b♮n]?)(do|re|mi|fa|sol|so|la|si|ti)([♯#♭b♮]?)$")


def _normalize(token: str) -> tuple[str, str]:
    m = _TOKEN.match(token.strip().lower())
    if m is None:
        raise ParameterError(f"unknown solfège token {token!r}")
    pre, base, post = m.groups()
    if pre and post:
        raise ParameterError(f"token {token!r} carries two accidentals")
    base = {"sol": "so", "ti": "si"}.get(base, base)
    return _ACCIDENTALS[pre or post], base


def semitone_offset(token: str, table: Mapping[str, int] | None = None) -> int:
    table = SOLFEGE_SEMITONES if table is None else table
    acc, base = _normalize(token)
    key = acc + base
    if key in table:
        return int(table[key])
    if base not in table:
        raise ParameterError(f"no pitch for {base!r} in the solfège table")
    return int(table[base]) + {"#": 1, "b": -1, "": 0}[acc]


def note_pitch(token: str, reference: float = 440.0, table: Mapping[str, int] | None = None) -> float:
    """Equal-tempered pitch ``reference * 2**(k/12)`` of a solfège token.

    >>> round(note_pitch("re"), 2)
    587.33
    >>> round(note_pitch("♯so"), 2)
    415.3
    """
    return float(reference * 2.0 ** (semitone_offset(token, table) / 12.0))


def _hop_samples(n_samples: int, overlap_fraction: float) -> int:
    return int(round(n_samples * (1.0 - overlap_fraction)))


def overlap_add(parts: Sequence[np.ndarray], overlap_fraction: float) -> np.ndarray:
    """Place equal-length parts at a hop of ``(1 - overlap) * length`` samples
    and sum them where they overlap."""
    n = parts[0].size
    if any(p.size != n for p in parts):
        raise ParameterError("overlap_add needs equal-length parts")
    hop = _hop_samples(n, overlap_fraction)
    if hop < 1:
        raise ParameterError("overlap leaves no forward progress between parts")
    out = np.zeros(hop * (len(parts) - 1) + n)
    for k, p in enumerate(parts):
        out[k * hop : k * hop + n] += p
    return out


def melody_length(n_notes: int, note_samples: int, overlap_fraction: float) -> int:
    return _hop_samples(note_samples, overlap_fraction) * (n_notes - 1) + note_samples


def build_melody(spec: MelodySpec, method: str = "auto") -> TimeSeries:
    """Synthesize the notes of ``spec`` and overlap-add them.

    Note ``k`` starts ``k * round(note_samples * (1 - overlap))`` samples in.
    Its voice is ``spec.note_template`` retuned to the note pitch and seeded
    from ``spec.seed.child("note", k)``.
    """
    template = spec.note_template
    parts = []
    for k, token in enumerate(spec.notes):
        note = replace(
            template,
            fiducial_freq=note_pitch(token, spec.reference_pitch, spec.solfege),
            duration=spec.note_duration,
            seed=spec.seed.child("note", k),
        )
        parts.append(synth_unison_timbre(note, method).samples)
    return TimeSeries(overlap_add(parts, spec.overlap_fraction), template.sample_rate)


def concat_segments(segments: Sequence[TimeSeries], overlap_fraction: float) -> TimeSeries:
    """Join segments with the same placement rule as :func:`build_melody`."""
    if not segments:
        raise ParameterError("no segments to concatenate")
    if not 0.0 <= overlap_fraction <= 0.9:
        raise ParameterError(f"overlap_fraction must lie in [0, 0.9], got {overlap_fraction}")
    rate = segments[0].sample_rate
    if any(s.sample_rate != rate for s in segments):
        raise ParameterError("segments have mixed sample rates")
    return TimeSeries(overlap_add([s.samples for s in segments], overlap_fraction), rate)
