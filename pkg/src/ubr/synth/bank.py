"""Evaluation of large sums of fixed-frequency sinusoids on a uniform grid.

``sum_k a_k sin(2 pi f_k n / fs + phi_k)`` is computed either directly or
with an FFT scheme that is exact up to float64 rounding: each frequency is
split into its nearest DFT bin ``j_k`` and an offset ``delta_k`` in
``[-1/2, 1/2]`` bins, and the off-bin factor ``exp(2 pi i delta_k u)`` with
``u = n/N - 1/2`` is expanded as a Taylor series. Every Taylor order costs one
inverse FFT, so the cost no longer grows with the number of tones.
"""

from __future__ import annotations

import numpy as np

# |2 pi delta u| <= pi/2, so the 24th Taylor term is below 1e-19 relative.
TAYLOR_TERMS = 24
# Above this many tones the FFT path is faster than direct evaluation.
AUTO_FFT_TONES = 96


def _as_arrays(freqs, amps, phases):
    freqs = np.atleast_1d(np.asarray(freqs, dtype=np.float64))
    amps = np.broadcast_to(np.asarray(amps, dtype=np.float64), freqs.shape)
    phases = np.broadcast_to(np.asarray(phases, dtype=np.float64), freqs.shape)
    return freqs, amps, phases


def sine_bank_direct(freqs, amps, phases, n_samples: int, sample_rate: float) -> np.ndarray:
    freqs, amps, phases = _as_arrays(freqs, amps, phases)
    t = np.arange(n_samples) / sample_rate
    out = np.zeros(n_samples)
    for f, a, p in zip(freqs, amps, phases):
        if a != 0.0:
            out += a * np.sin(2.0 * np.pi * f * t + p)
    return out


def sine_bank_fft(freqs, amps, phases, n_samples: int, sample_rate: float, terms: int = TAYLOR_TERMS) -> np.ndarray:
    freqs, amps, phases = _as_arrays(freqs, amps, phases)
    n = int(n_samples)
    x = freqs * (n / sample_rate)
    j = np.rint(x)
    delta = x - j
    bins = np.mod(j.astype(np.int64), n)
    coef = amps * np.exp(1j * (phases + np.pi * delta))
    step = 2j * np.pi * delta

    layers = []
    for p in range(terms):
        grid = np.bincount(bins, weights=coef.real, minlength=n) + 1j * np.bincount(
            bins, weights=coef.imag, minlength=n
        )
        layers.append(grid)
        coef = coef * step / (p + 1)

    u = np.arange(n) / n - 0.5
    acc = np.zeros(n, dtype=np.complex128)
    # Horner in u, highest order first; one inverse FFT alive at a time.
    for grid in reversed(layers):
        acc *= u
        acc += np.fft.ifft(grid) * n
    return acc.imag


def sine_bank(freqs, amps, phases, n_samples: int, sample_rate: float, method: str = "auto") -> np.ndarray:
    """Sum of sinusoids ``a sin(2 pi f t + phi)`` sampled at ``t = n / sample_rate``.

    Parameters
    ----------
    freqs, amps, phases : array_like
        Tone frequencies (Hz, sign allowed), amplitudes and phases (rad).
        ``amps`` and ``phases`` broadcast against ``freqs``.
    n_samples : int
        Output length.
    sample_rate : float
        Samples per second.
    method : {"auto", "direct", "fft"}
        ``auto`` picks the FFT path above ``AUTO_FFT_TONES`` tones.
    """
    freqs, amps, phases = _as_arrays(freqs, amps, phases)
    if method == "auto":
        method = "fft" if freqs.size > AUTO_FFT_TONES else "direct"
    if method == "direct":
        return sine_bank_direct(freqs, amps, phases, n_samples, sample_rate)
    if method == "fft":
        return sine_bank_fft(freqs, amps, phases, n_samples, sample_rate)
    raise ValueError(f"unknown method {method!r}")
