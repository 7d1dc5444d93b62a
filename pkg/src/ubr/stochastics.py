"""Seedable randomness: derivable sub-streams, uniform draws and the
infrared-divergent detune sampler.

Every random quantity in the generators (detunes, phases, vibrato rates and
depths, IR-divergent offsets) is drawn from a :class:`SeedTree` stream so that
a figure preset regenerates bit-identically from its master seed.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

GENERATOR_NAME = "numpy.random.PCG64 (SeedSequence entropy=master_seed, spawn_key=crc32(tag),index per path element)"

_MASK64 = (1 << 64) - 1


def _tag_word(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


@dataclass(frozen=True)
class SeedTree:
    """A node in a deterministic tree of random streams.

    The stream at a node is a function of ``master_seed`` and the derivation
    ``path`` only. Sibling nodes map to distinct ``SeedSequence`` spawn keys,
    which numpy guarantees to give independent PCG64 streams.

    Examples
    --------
    >>> root = SeedTree(7)
    >>> a = root.child("source", 0).generator().random()
    >>> b = SeedTree(7).child("source", 0).generator().random()
    >>> a == b
    True
    """

    master_seed: int
    path: tuple[tuple[str, int], ...] = ()

    def child(self, tag: str, index: int = 0) -> SeedTree:
        return SeedTree(self.master_seed, self.path + ((str(tag), int(index)),))

    def seed_sequence(self) -> np.random.SeedSequence:
        key = []
        for tag, index in self.path:
            key.extend((_tag_word(tag), index & _MASK64))
        return np.random.SeedSequence(entropy=self.master_seed & _MASK64, spawn_key=tuple(key))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))

    def describe(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "path": [[tag, index] for tag, index in self.path],
            "generator": GENERATOR_NAME,
        }


def uniform(range_lo: float, range_hi: float, rng: np.random.Generator) -> float:
    """Draw one value uniformly from ``[range_lo, range_hi]``.

    A degenerate range returns the bound without consuming a draw.
    """
    if range_lo > range_hi:
        raise ParameterError(f"empty range [{range_lo}, {range_hi}]")
    if range_lo == range_hi:
        return float(range_lo)
    return float(rng.uniform(range_lo, range_hi))


@dataclass(frozen=True)
class IRDivergentSpec:
    """Detune distribution with density proportional to ``1/(|kappa| + epsilon)``.

    ``epsilon`` is the infrared cutoff and ``kappa_max`` truncates the
    magnitude; both are in Hz.
    """

    epsilon: float = 1e-5
    kappa_max: float = 12400.0
    symmetric: bool = True

    def __post_init__(self):
        if not (self.epsilon > 0 and np.isfinite(self.epsilon)):
            raise ParameterError(f"epsilon must be positive, got {self.epsilon}")
        if not (self.kappa_max > self.epsilon and np.isfinite(self.kappa_max)):
            raise ParameterError(
                f"kappa_max must exceed epsilon, got kappa_max={self.kappa_max}, epsilon={self.epsilon}"
            )

    @property
    def uniform_upper(self) -> float:
        """Upper end of the uniform variate that maps onto ``kappa_max``."""
        return float(np.log1p(self.kappa_max / self.epsilon))

    def magnitude_cdf(self, kappa):
        kappa = np.clip(np.asarray(kappa, dtype=float), 0.0, self.kappa_max)
        return np.log1p(kappa / self.epsilon) / self.uniform_upper


def ir_divergent_inverse_cdf(x, epsilon: float):
    """Map a uniform variate ``x >= 0`` to a magnitude ``epsilon*(exp(x) - 1)``."""
    return epsilon * np.expm1(x)


def sample_ir_divergent(spec: IRDivergentSpec, rng: np.random.Generator, size=None):
    """Draw detune offsets from the truncated IR-divergent distribution.

    Magnitudes come from the inverse CDF on ``[0, ln(1 + kappa_max/epsilon)]``,
    which is exact and needs no rejection loop. With ``spec.symmetric`` the
    sign is an independent fair coin drawn after all magnitudes.

    Returns a float for ``size=None``, otherwise an array.
    """
    x = rng.uniform(0.0, spec.uniform_upper, size)
    kappa = np.minimum(ir_divergent_inverse_cdf(x, spec.epsilon), spec.kappa_max)
    if spec.symmetric:
        flip = rng.random(size) < 0.5
        kappa = np.where(flip, -kappa, kappa)
    if size is None:
        return float(kappa)
    return kappa
