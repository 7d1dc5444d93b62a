from .bank import sine_bank
from .melody import (
    DEFAULT_MELODY,
    SOLFEGE_SEMITONES,
    build_melody,
    concat_segments,
    note_pitch,
)
from .specs import EnsembleSpec, MelodySpec, ResonanceSpec, TimbreSpec, VibratoSpec
from .unison import (
    synth_ir_ensemble,
    synth_resonance,
    synth_timbre_note,
    synth_timbre_source,
    synth_unison_timbre,
    synth_unison_timbre_vibrato,
    synth_unison_vibrato,
    vibrato_phase,
)

__all__ = [
    "DEFAULT_MELODY",
    "SOLFEGE_SEMITONES",
    "EnsembleSpec",
    "MelodySpec",
    "ResonanceSpec",
    "TimbreSpec",
    "VibratoSpec",
    "build_melody",
    "concat_segments",
    "note_pitch",
    "sine_bank",
    "synth_ir_ensemble",
    "synth_resonance",
    "synth_timbre_note",
    "synth_timbre_source",
    "synth_unison_timbre",
    "synth_unison_timbre_vibrato",
    "synth_unison_vibrato",
    "vibrato_phase",
]
