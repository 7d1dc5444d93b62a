"""Uniformly sampled amplitude signal."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

DEFAULT_SAMPLE_RATE = 44100.0


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Real samples at a fixed rate. The sample buffer is made read-only."""

    samples: np.ndarray
    sample_rate: float = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ParameterError("a time series needs a non-empty 1-D sample buffer")
        if not (self.sample_rate > 0):
            raise ParameterError(f"sample_rate must be positive, got {self.sample_rate}")
        if arr.flags.writeable:
            arr = arr.view()
            arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) / self.sample_rate

    def peak(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def scaled(self, factor: float) -> TimeSeries:
        return TimeSeries(self.samples * factor, self.sample_rate)
