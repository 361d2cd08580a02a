"""Streaming mean/variance accumulation (Welford updates, Chan merges)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StatAccumulator:
    """Count, mean and sum of squared deviations of a stream of reals.

    Instances are immutable; ``accumulate``, ``update`` and ``merge`` return
    new accumulators. Merging is exact up to rounding, so per-worker
    accumulators can be combined after the fact.
    """

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def accumulate(self, x: float) -> "StatAccumulator":
        n = self.count + 1
        delta = x - self.mean
        mean = self.mean + delta / n
        return StatAccumulator(n, mean, self.m2 + delta * (x - mean))

    @classmethod
    def from_values(cls, values) -> "StatAccumulator":
        """Accumulator of a finite batch, computed with a two-pass sum."""
        values = np.asarray(values, dtype=float).ravel()
        if values.size == 0:
            return cls()
        mean = float(values.mean())
        dev = values - mean
        return cls(int(values.size), mean, float(dev @ dev))

    def update(self, values) -> "StatAccumulator":
        return self.merge(StatAccumulator.from_values(values))

    def merge(self, other: "StatAccumulator") -> "StatAccumulator":
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        n = self.count + other.count
        delta = other.mean - self.mean
        if self.mean == other.mean:
            mean = self.mean
        else:
            mean = self.mean + delta * (other.count / n)
        m2 = self.m2 + other.m2 + delta * delta * (self.count * other.count / n)
        return StatAccumulator(n, mean, m2)

    def __add__(self, other: "StatAccumulator") -> "StatAccumulator":
        return self.merge(other)

    @property
    def variance(self) -> float:
        """Unbiased sample variance; NaN for fewer than two values."""
        if self.count < 2:
            return math.nan
        return self.m2 / (self.count - 1)

    @property
    def std_error(self) -> float:
        if self.count < 2:
            return math.nan
        return math.sqrt(self.variance / self.count)
