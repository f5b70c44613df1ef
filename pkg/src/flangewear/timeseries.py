"""Uniformly sampled real-valued signals."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSignal


@dataclass(frozen=True)
class TimeSeries:
    """Samples taken every ``sample_period`` seconds, starting at ``t0``."""

    sample_period: float
    samples: tuple
    t0: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.sample_period) and self.sample_period > 0):
            raise InvalidSignal(f"sample_period must be positive, got {self.sample_period}")
        samples = tuple(float(x) for x in self.samples)
        if not samples:
            raise InvalidSignal("time series must contain at least one sample")
        if not all(math.isfinite(x) for x in samples):
            raise InvalidSignal("time series contains non-finite samples")
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_rate(cls, sample_rate, samples, t0=0.0):
        return cls(1.0 / sample_rate, samples, t0)

    @property
    def sample_rate(self):
        return 1.0 / self.sample_period

    def __len__(self):
        return len(self.samples)

    def times(self):
        return self.t0 + self.sample_period * np.arange(len(self.samples))

    def values(self):
        return np.asarray(self.samples, dtype=float)
