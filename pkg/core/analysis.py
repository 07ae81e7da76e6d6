"""Exact and approximate false positive rates.

Notation: n inserted elements, m bits, k hash functions, d distinct bit
positions of a queried element. Closed forms (F_a, F_p, overlap
probabilities) accept real n; the combinatorial ones (F_s, per-element)
sum over the occupancy distribution of n*k balls and need integer n.
"""
import math
from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import numpy as np
from scipy import stats

from .errors import AnalysisInputError, GeometryError
from .occupancy import occupancy_distribution

LN2 = math.log(2.0)

N_CONVENTIONS = ("floor", "round", "ceil", "scaled-floor")


@dataclass(frozen=True)
class AnalysisInputs:
    n: float
    m: int
    k: int
    d: int = 0
    occupation: float = 1.0
    n1: float = 0
    n2: float = 0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise AnalysisInputError(f"n must be >= 0, got {self.n}")
        if not self.m >= self.k >= 1:
            raise AnalysisInputError(f"need m >= k >= 1, got m={self.m} k={self.k}")
        if self.d and not 1 <= self.d <= self.k:
            raise AnalysisInputError(f"d must lie in [1, k={self.k}], got {self.d}")
        if self.occupation <= 0:
            raise AnalysisInputError(f"occupation must be > 0, got {self.occupation}")
        if self.n1 < 0 or self.n2 < 0:
            raise AnalysisInputError("set sizes must be >= 0")


def _integer_n(n: float) -> int:
    if n < 0 or float(n) != int(n):
        raise AnalysisInputError(f"n must be a non-negative integer here, got {n}")
    return int(n)


def _require_divides(m: int, k: int) -> None:
    if k < 1 or m % k != 0:
        raise GeometryError(f"need k | m, got m={m} k={k}")


# ----------------------------------------------------------------------
# Birthday problem
# ----------------------------------------------------------------------

def birthday_collision_prob(m: int, k: int) -> float:
    """P(k uniform draws from m values are not all distinct) = 1 - P(m,k)/m^k."""
    if m < 1 or k < 1:
        raise AnalysisInputError(f"need m >= 1 and k >= 1, got m={m} k={k}")
    if k > m:
        return 1.0
    log_distinct = sum(math.log1p(-j / m) for j in range(1, k))
    return -math.expm1(log_distinct) + 0.0


# ----------------------------------------------------------------------
# Global false positive rates
# ----------------------------------------------------------------------

def fpr_approx(n: float, m: int, k: int) -> float:
    """F_a = (1 - (1 - 1/m)^{kn})^k; a strict lower bound of F_s for k > 1."""
    if n < 0:
        raise AnalysisInputError(f"n must be >= 0, got {n}")
    return (1.0 - (1.0 - 1.0 / m) ** (k * n)) ** k


def fpr_original_bloom(n: float, m: int, k: int) -> float:
    """Bloom's formula assuming k distinct bits per element; equals F_p."""
    if n < 0:
        raise AnalysisInputError(f"n must be >= 0, got {n}")
    return (1.0 - (1.0 - k / m) ** n) ** k


def fpr_partitioned_exact(n: float, m: int, k: int) -> float:
    """F_p: each m/k part is a one-hash filter, so its fill is exact."""
    _require_divides(m, k)
    return fpr_original_bloom(n, m, k)


def fpr_standard_exact(n: int, m: int, k: int) -> float:
    """F_s = sum_i B(nk, m, i) (i/m)^k."""
    n = _integer_n(n)
    occ = occupancy_distribution(n * k, m)
    fill = np.arange(m + 1) / m
    return float(np.dot(occ.probs, fill ** k))


# ----------------------------------------------------------------------
# Per-element rates
# ----------------------------------------------------------------------

def distinct_hit_prob(i: int, m: int, d: int) -> float:
    """P(d fixed distinct positions all fall among i set bits of m)."""
    if d > i:
        return 0.0
    p = 1.0
    for j in range(d):
        p *= (i - j) / (m - j)
    return p


def _distinct_hit_vector(m: int, d: int) -> np.ndarray:
    i = np.arange(m + 1, dtype=float)
    p = np.ones(m + 1)
    for j in range(d):
        p *= np.clip(i - j, 0.0, None) / (m - j)
    return p


def fpr_per_element(n: int, m: int, k: int, d: int) -> float:
    """F_s(n, m, k, d): rate for an element whose k hashes hit d distinct bits."""
    if not 1 <= d <= k:
        raise AnalysisInputError(f"d must lie in [1, k={k}], got {d}")
    n = _integer_n(n)
    occ = occupancy_distribution(n * k, m)
    return float(np.dot(occ.probs, _distinct_hit_vector(m, d)))


def fpr_per_element_naive(n: int, m: int, k: int, d: int) -> float:
    """sum_i B(nk, m, i) (i/m)^d -- wrong: treats the d positions as independent."""
    if not 1 <= d <= k:
        raise AnalysisInputError(f"d must lie in [1, k={k}], got {d}")
    n = _integer_n(n)
    occ = occupancy_distribution(n * k, m)
    fill = np.arange(m + 1) / m
    return float(np.dot(occ.probs, fill ** d))


def collision_count_distribution(k: int, m: int) -> np.ndarray:
    """probs[d] = B(k, m, d), d in [0, k]; c collisions has probability probs[k - c]."""
    if k < 1 or m < 1:
        raise AnalysisInputError(f"need k >= 1 and m >= 1, got k={k} m={m}")
    occ = occupancy_distribution(k, m)
    out = np.zeros(k + 1)
    top = min(k, m)
    out[:top + 1] = occ.probs[:top + 1]
    return out


# ----------------------------------------------------------------------
# Set overlap, reductions, blocking
# ----------------------------------------------------------------------

def false_overlap_probs(m: int, k: int, n1: float, n2: float) -> Tuple[float, float]:
    """(P_s, P_p): chance two disjoint sets' filters fail the disjointness test."""
    _require_divides(m, k)
    if n1 < 0 or n2 < 0:
        raise AnalysisInputError("set sizes must be >= 0")
    pairs = n1 * n2
    p_s = 1.0 - (1.0 - 1.0 / m) ** (k * k * pairs)
    p_p = (1.0 - (1.0 - k / m) ** pairs) ** k
    return p_s, p_p


def _miss_probability(balls_a: int, balls_b: int, bins: int) -> float:
    """P(no throw of B lands on a bin occupied by A)."""
    occ = occupancy_distribution(balls_a, bins)
    free = 1.0 - np.arange(bins + 1) / bins
    return float(np.dot(occ.probs, free ** balls_b))


def false_overlap_probs_exact(m: int, k: int, n1: int, n2: int) -> Tuple[float, float]:
    """(P_s, P_p) without the independent-pairs approximation.

    Conditions on how many bits the first set occupies (per part for the
    partitioned filter) and asks every throw of the second set to miss them.
    """
    _require_divides(m, k)
    n1, n2 = _integer_n(n1), _integer_n(n2)
    p_s = 1.0 - _miss_probability(k * n1, k * n2, m)
    p_p = (1.0 - _miss_probability(n1, n2, m // k)) ** k
    return p_s, p_p


def fpr_truncated(n: float, m: int, k: int, k_prime: int) -> float:
    """Rate of the first k' parts of a partitioned (m, k) filter."""
    _require_divides(m, k)
    if not 1 <= k_prime <= k:
        raise AnalysisInputError(f"k' must lie in [1, {k}], got {k_prime}")
    return (1.0 - (1.0 - k / m) ** n) ** k_prime


def fpr_folded(n: int, m: int, k: int, m_prime: int) -> float:
    """Folding to m' | m leaves a standard (m', k) filter with uniform indices."""
    if m_prime < 1 or m % m_prime != 0:
        raise GeometryError(f"m'={m_prime} must divide m={m}")
    return fpr_standard_exact(n, m_prime, k)


def fpr_blocked(n: int, m: int, k: int, block_bits: int, partitioned: bool) -> float:
    """Average over the Binomial(n, b/m) load of the queried block."""
    n = _integer_n(n)
    if block_bits < k or m % block_bits != 0:
        raise GeometryError(f"need k <= block_bits and block_bits | m, got m={m} block_bits={block_bits}")
    inner: Callable[[int], float]
    if partitioned:
        _require_divides(block_bits, k)
        inner = lambda load: fpr_partitioned_exact(load, block_bits, k)  # noqa: E731
    else:
        inner = lambda load: fpr_standard_exact(load, block_bits, k)  # noqa: E731

    loads = np.arange(n + 1)
    weights = stats.binom.pmf(loads, n, block_bits / m)
    # Tail loads far past the mean carry no weight at double precision.
    keep = weights > 1e-300
    return float(sum(w * inner(int(load)) for load, w in zip(loads[keep], weights[keep])))


def double_hash_pair_collision_prob(m: int, k: int, partitioned: bool) -> float:
    """P(h1 and h2 of two elements both collide modulo the indexed range)."""
    if partitioned:
        _require_divides(m, k)
        return 1.0 / (m // k) ** 2
    return 1.0 / m ** 2


# ----------------------------------------------------------------------
# Capacity
# ----------------------------------------------------------------------

def nominal_capacity(m: int, k: int, occupation: float = 1.0) -> int:
    """floor(occupation * (m/k) * ln 2): the n at which expected fill reaches 1/2."""
    return n_for_occupation(m, k, occupation, "floor")


def n_for_occupation(m: int, k: int, occupation: float, convention: str = "floor") -> int:
    if occupation <= 0:
        raise AnalysisInputError(f"occupation must be > 0, got {occupation}")
    raw = (m / k) * LN2
    if convention == "floor":
        return math.floor(occupation * raw)
    if convention == "round":
        return round(occupation * raw)
    if convention == "ceil":
        return math.ceil(occupation * raw)
    if convention == "scaled-floor":
        return math.floor(occupation * math.floor(raw))
    raise AnalysisInputError(f"unknown n convention {convention!r}; choose from {N_CONVENTIONS}")


_GLOBAL_FPR: Dict[str, Callable[[int, int, int], float]] = {
    "standard": fpr_standard_exact,
    "partitioned": fpr_partitioned_exact,
    "approx": fpr_approx,
}


def capacity_for_fpr(m: int, k: int, target: float, variant: str = "partitioned") -> int:
    """Largest n whose exact FPR stays <= target (0 if even n=1 exceeds it)."""
    if not 0 < target < 1:
        raise AnalysisInputError(f"target must lie in (0, 1), got {target}")
    if variant not in _GLOBAL_FPR:
        raise AnalysisInputError(f"variant must be one of {sorted(_GLOBAL_FPR)}, got {variant!r}")
    fpr = _GLOBAL_FPR[variant]

    # FPR is increasing in n: bracket, then bisect.
    lo, hi = 0, max(1, nominal_capacity(m, k))
    while fpr(hi, m, k) <= target:
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fpr(mid, m, k) <= target:
            lo = mid
        else:
            hi = mid
    return lo
