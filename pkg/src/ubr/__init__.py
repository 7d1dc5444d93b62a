"""Synthesis and low-frequency spectral analysis of beating ensembles.

Generators build unison, melody, resonance and IR-divergent signals; the
analysis squares the amplitude, takes the periodogram, and fits the
low-frequency power-law index.
"""

__version__ = "0.1.0"
