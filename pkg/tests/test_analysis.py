from collections import Counter
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from core.analysis import (
    AnalysisInputs,
    birthday_collision_prob,
    capacity_for_fpr,
    collision_count_distribution,
    double_hash_pair_collision_prob,
    false_overlap_probs,
    false_overlap_probs_exact,
    fpr_approx,
    fpr_blocked,
    fpr_folded,
    fpr_original_bloom,
    fpr_partitioned_exact,
    fpr_per_element,
    fpr_per_element_naive,
    fpr_standard_exact,
    fpr_truncated,
    n_for_occupation,
    nominal_capacity,
)
from core.errors import AnalysisInputError, GeometryError


# ----------------------------------------------------------------------
# Exhaustive enumeration over every insert assignment and query tuple
# ----------------------------------------------------------------------

def _masks_after(throws: int, m: int) -> Counter:
    """Multiplicity of each set-bit mask over all m**throws assignments."""
    masks = Counter({0: 1})
    for _ in range(throws):
        nxt: Counter = Counter()
        for mask, count in masks.items():
            for bit in range(m):
                nxt[mask | (1 << bit)] += count
        masks = nxt
    return masks


def _enumerated_rates(n: int, m: int, k: int):
    masks = _masks_after(n * k, m)
    total = Fraction(1, m ** (n * k))
    hits = Fraction(0)
    by_d = {d: [Fraction(0), 0] for d in range(1, k + 1)}
    for query in product(range(m), repeat=k):
        d = len(set(query))
        q_mask = sum(1 << b for b in set(query))
        p = sum(count for mask, count in masks.items() if mask & q_mask == q_mask) * total
        hits += p
        by_d[d][0] += p
        by_d[d][1] += 1
    global_rate = hits / m ** k
    per_d = {d: acc / cnt for d, (acc, cnt) in by_d.items() if cnt}
    return global_rate, per_d


ORACLE_GRID = [
    (n, m, k)
    for m in range(1, 7)
    for k in range(1, 5)
    for n in range(1, 9)
    if n * k <= 8
]


@pytest.mark.parametrize("n,m,k", ORACLE_GRID)
def test_exact_formulas_match_enumeration(n, m, k):
    global_rate, per_d = _enumerated_rates(n, m, k)
    assert fpr_standard_exact(n, m, k) == pytest.approx(float(global_rate), abs=1e-12)
    for d, rate in per_d.items():
        assert fpr_per_element(n, m, k, d) == pytest.approx(float(rate), abs=1e-12)


def test_tiny_anchor_values():
    assert fpr_standard_exact(1, 2, 2) == pytest.approx(0.625, abs=1e-15)
    assert fpr_per_element(1, 2, 2, 2) == pytest.approx(0.5, abs=1e-15)
    assert fpr_per_element_naive(1, 2, 2, 2) == pytest.approx(0.625, abs=1e-15)
    assert fpr_per_element(1, 2, 2, 1) == pytest.approx(0.75, abs=1e-15)


# ----------------------------------------------------------------------
# Anchors from the comparison tables
# ----------------------------------------------------------------------

def test_global_rate_anchors():
    assert round(fpr_approx(5, 64, 8), 8) == pytest.approx(0.00227672, abs=1e-8)
    assert round(fpr_standard_exact(5, 64, 8), 8) == pytest.approx(0.00260362, abs=1e-8)
    assert round(fpr_partitioned_exact(5, 64, 8), 8) == pytest.approx(0.00316870, abs=1e-8)
    assert round(fpr_partitioned_exact(11, 64, 4), 8) == pytest.approx(0.06676410, abs=1e-8)
    ratio = fpr_partitioned_exact(22, 512, 16) / fpr_standard_exact(22, 512, 16)
    assert ratio == pytest.approx(1.09783475, abs=1e-8)


def test_original_formula_equals_partitioned():
    for n, m, k in [(5, 64, 8), (44, 512, 8), (3.5, 96, 4)]:
        assert fpr_original_bloom(n, m, k) == fpr_partitioned_exact(n, m, k)


def test_birthday_anchors():
    assert birthday_collision_prob(96, 8) == pytest.approx(0.2588, abs=5e-5)
    assert birthday_collision_prob(64, 4) == pytest.approx(0.0911, abs=5e-5)
    assert birthday_collision_prob(2, 3) == 1.0
    assert birthday_collision_prob(64, 1) == 0.0


def test_collision_count_anchors():
    assert collision_count_distribution(8, 64)[8] == pytest.approx(0.6340, abs=5e-5)
    assert collision_count_distribution(8, 64)[7] == pytest.approx(0.3115, abs=5e-5)
    assert collision_count_distribution(16, 512)[16] == pytest.approx(0.7892, abs=5e-5)
    assert 1 - collision_count_distribution(8, 512)[8] == pytest.approx(0.0535, abs=5e-5)


@pytest.mark.parametrize("k,m", [(4, 64), (8, 64), (8, 512), (16, 512), (8, 5)])
def test_collision_distribution_sums_to_one(k, m):
    probs = collision_count_distribution(k, m)
    assert len(probs) == k + 1
    assert probs[0] == 0.0
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert 1 - probs[k] == pytest.approx(birthday_collision_prob(m, k), abs=1e-12)


def test_nominal_capacity():
    assert nominal_capacity(64, 8) == 5
    assert nominal_capacity(64, 4) == 11
    assert nominal_capacity(4096, 16) == 177
    assert n_for_occupation(64, 4, 0.5, "round") == 6
    assert n_for_occupation(64, 4, 0.5, "ceil") == 6
    assert n_for_occupation(64, 8, 0.25, "scaled-floor") == 1
    with pytest.raises(AnalysisInputError):
        n_for_occupation(64, 4, 0.5, "nearest")


# ----------------------------------------------------------------------
# Properties over a sweep
# ----------------------------------------------------------------------

SWEEP = [(m, k) for m in (64, 512) for k in (2, 4, 8, 16)]


@pytest.mark.parametrize("m,k", SWEEP)
def test_approximation_is_strict_lower_bound(m, k):
    for n in range(1, 2 * nominal_capacity(m, k) + 1):
        assert fpr_approx(n, m, k) < fpr_standard_exact(n, m, k)


@pytest.mark.parametrize("m,k", SWEEP)
def test_per_element_rates_reconstruct_global(m, k):
    weights = collision_count_distribution(k, m)
    step = max(1, nominal_capacity(m, k) // 8)
    for n in range(1, 2 * nominal_capacity(m, k) + 1, step):
        total = sum(weights[d] * fpr_per_element(n, m, k, d) for d in range(1, k + 1))
        assert total == pytest.approx(fpr_standard_exact(n, m, k), abs=1e-12)


def test_per_element_rate_falls_with_distinct_count():
    rates = [fpr_per_element(5, 64, 8, d) for d in range(1, 9)]
    assert all(a > b for a, b in zip(rates, rates[1:]))
    assert fpr_per_element(5, 64, 8, 8) < fpr_standard_exact(5, 64, 8)
    assert fpr_per_element(5, 64, 8, 6) / fpr_standard_exact(5, 64, 8) == pytest.approx(3.25, abs=5e-3)


def test_naive_per_element_overstates_distinct_case():
    for d in range(2, 9):
        assert fpr_per_element_naive(5, 64, 8, d) > fpr_per_element(5, 64, 8, d)


def test_zero_insertions():
    assert fpr_standard_exact(0, 64, 8) == 0.0
    assert fpr_partitioned_exact(0, 64, 8) == 0.0
    assert fpr_per_element(0, 64, 8, 3) == 0.0


# ----------------------------------------------------------------------
# Set overlap, reductions, blocking
# ----------------------------------------------------------------------

def test_false_overlap_ordering():
    p_s, p_p = false_overlap_probs(64, 4, 4, 4)
    assert p_p < p_s
    assert false_overlap_probs(64, 4, 0, 4) == (0.0, 0.0)
    e_s, e_p = false_overlap_probs_exact(64, 4, 4, 4)
    assert e_p < e_s
    assert e_s == pytest.approx(p_s, abs=2e-3)
    assert e_p == pytest.approx(p_p, abs=1e-2)
    assert false_overlap_probs_exact(64, 4, 0, 4) == (0.0, 0.0)


def test_overlap_exact_against_enumeration():
    # One element per set, m=4, k=2: parts of 2 bits.
    m, k = 4, 2
    s_hits = p_hits = 0
    for a in product(range(m), repeat=k):
        for b in product(range(m), repeat=k):
            s_hits += bool(set(a) & set(b))
    for a in product(range(m // k), repeat=k):
        for b in product(range(m // k), repeat=k):
            p_hits += all(x == y for x, y in zip(a, b))
    e_s, e_p = false_overlap_probs_exact(m, k, 1, 1)
    assert e_s == pytest.approx(s_hits / m ** (2 * k), abs=1e-12)
    assert e_p == pytest.approx(p_hits / (m // k) ** (2 * k), abs=1e-12)


def test_truncated_and_folded():
    assert fpr_truncated(5, 64, 8, 8) == pytest.approx(fpr_partitioned_exact(5, 64, 8))
    assert fpr_truncated(5, 64, 8, 4) > fpr_truncated(5, 64, 8, 8)
    assert fpr_folded(5, 128, 8, 64) == fpr_standard_exact(5, 64, 8)
    with pytest.raises(GeometryError):
        fpr_folded(5, 128, 8, 48)
    with pytest.raises(AnalysisInputError):
        fpr_truncated(5, 64, 8, 9)


def test_blocked_single_block_reduces_to_unblocked():
    assert fpr_blocked(44, 512, 8, 512, False) == pytest.approx(fpr_standard_exact(44, 512, 8), rel=1e-12)
    assert fpr_blocked(44, 512, 8, 512, True) == pytest.approx(fpr_partitioned_exact(44, 512, 8), rel=1e-12)


def test_blocking_costs_accuracy():
    n = nominal_capacity(4096, 8)
    assert fpr_blocked(n, 4096, 8, 512, False) > fpr_standard_exact(n, 4096, 8)
    assert fpr_blocked(n, 4096, 8, 512, True) > fpr_blocked(n, 4096, 8, 512, False)


def test_pair_collision_probability():
    assert double_hash_pair_collision_prob(64, 4, False) == 1 / 64 ** 2
    assert double_hash_pair_collision_prob(64, 4, True) == 1 / 16 ** 2


def test_capacity_for_target():
    n = capacity_for_fpr(512, 8, 0.0039, "partitioned")
    assert fpr_partitioned_exact(n, 512, 8) <= 0.0039 < fpr_partitioned_exact(n + 1, 512, 8)
    assert capacity_for_fpr(512, 8, 0.0039, "standard") >= n
    with pytest.raises(AnalysisInputError):
        capacity_for_fpr(512, 8, 1.5)


@pytest.mark.parametrize(
    "kwargs",
    [dict(n=-1, m=64, k=4), dict(n=1, m=3, k=4), dict(n=1, m=64, k=4, d=5), dict(n=1, m=64, k=4, occupation=0)],
)
def test_input_validation(kwargs):
    with pytest.raises(AnalysisInputError):
        AnalysisInputs(**kwargs)


def test_non_integer_n_rejected_where_combinatorial():
    with pytest.raises(AnalysisInputError):
        fpr_standard_exact(2.5, 64, 4)
    assert np.isfinite(fpr_approx(2.5, 64, 4))
    with pytest.raises(GeometryError):
        fpr_partitioned_exact(5, 63, 4)
