"""Balls into bins: how many of m bins are non-empty after n uniform throws.

`occupancy_distribution` is the working implementation: a forward recurrence
over throws,

    P(t, i) = P(t-1, i) * i/m + P(t-1, i-1) * (m-i+1)/m,   P(0, 0) = 1,

which only ever adds non-negative terms. The inclusion-exclusion form
C(m, i) * e(n, i) / m^n with surjection counts e(n, i) is exact in integers
but cancels catastrophically in floating point; it is kept as
`occupancy_exact`, a Fraction-valued oracle for small inputs.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List

import numpy as np


@dataclass(frozen=True)
class OccupancyDistribution:
    balls: int
    bins: int
    probs: np.ndarray  # probs[i] = P(exactly i non-empty bins), i in [0, bins]

    def __getitem__(self, i: int) -> float:
        return float(self.probs[i]) if 0 <= i <= self.bins else 0.0

    def mean(self) -> float:
        return float(np.dot(np.arange(self.bins + 1), self.probs))


def surjection_count(n: int, i: int) -> int:
    """Number of onto functions from an n-set to an i-set (exact integer)."""
    if n < 0 or i < 0:
        raise ValueError(f"need n, i >= 0, got n={n} i={i}")
    if i > n:
        return 0
    return sum((-1) ** j * math.comb(i, j) * (i - j) ** n for j in range(i + 1))


@lru_cache(maxsize=256)
def occupancy_distribution(balls: int, bins: int) -> OccupancyDistribution:
    if balls < 0 or bins < 1:
        raise ValueError(f"need balls >= 0 and bins >= 1, got balls={balls} bins={bins}")

    probs = np.zeros(bins + 1)
    probs[0] = 1.0
    i = np.arange(bins + 1, dtype=float)
    stay = i / bins
    grow = (bins - i + 1) / bins  # used for the i-1 -> i transition

    top = 0
    for _ in range(balls):
        top = min(top + 1, bins)
        nxt = probs[:top + 1] * stay[:top + 1]
        nxt[1:] += probs[:top] * grow[1:top + 1]
        probs[:top + 1] = nxt

    probs.setflags(write=False)
    return OccupancyDistribution(balls=balls, bins=bins, probs=probs)


def occupancy_exact(balls: int, bins: int) -> List[Fraction]:
    """B(balls, bins, i) as exact rationals via surjection counts."""
    total = bins ** balls
    return [
        Fraction(math.comb(bins, i) * surjection_count(balls, i), total)
        for i in range(bins + 1)
    ]
