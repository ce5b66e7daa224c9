from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ttlab import brw
from ttlab.errors import GenerationTooLarge, InvalidParams
from ttlab.harness.statistics import ks_statistic, ks_two_sample, ks_two_sample_critical
from ttlab.rng import TAG_WALK, SeedSpec, exponentials

seeds = st.builds(SeedSpec, st.integers(0, 2**64 - 1))


def _heap_reference(L, seed):
    """Generation L by explicit heap accumulation in numpy (slow, obvious)."""
    m = 2 ** (L + 1) - 1
    e = exponentials(seed.key_for(TAG_WALK), np.arange(m))
    q = np.empty(m)
    q[0] = e[0]
    for i in range(1, m):
        q[i] = q[(i - 1) // 2] + e[i]
    return q[2**L - 1 :]


@given(st.integers(0, 9), seeds)
def test_generation_matches_heap_reference(L, seed):
    gen = brw.sample_generation(L, 0.0, "none", seed)
    assert gen.values.size == 2**L
    assert np.all(gen.values > 0)
    assert np.allclose(gen.values, _heap_reference(L, seed), rtol=1e-14, atol=0)


@given(st.integers(0, 10), st.floats(0.0, 0.9), seeds)
def test_eps_ordering_pathwise(L, eps, seed):
    lo = brw.sample_generation(L, eps, "minus", seed)
    mid = brw.sample_generation(L, eps, "none", seed)
    hi = brw.sample_generation(L, eps, "plus", seed)
    assert np.all(lo.values <= mid.values) and np.all(mid.values <= hi.values)
    x_lo, x, x_hi = (brw.martingale_statistic(g) for g in (lo, mid, hi))
    assert x_lo >= x >= x_hi


@given(st.integers(0, 12), seeds)
def test_bit_determinism(L, seed):
    a = brw.sample_generation(L, 0.1, "plus", seed)
    b = brw.sample_generation(L, 0.1, "plus", seed)
    assert np.array_equal(a.values, b.values)
    assert brw.sample_limit_recursive(L, seed) == brw.sample_limit_recursive(L, seed)


@given(st.integers(0, 14), seeds)
def test_statistic_matches_exact_sum(L, seed):
    gen = brw.sample_generation(L, 0.0, "none", seed)
    exact = math.fsum(np.exp(-gen.values).tolist())
    assert brw.martingale_statistic(gen) == pytest.approx(exact, rel=1e-15, abs=0)


def test_argument_checks():
    with pytest.raises(GenerationTooLarge):
        brw.sample_generation(25, 0.0, "none", SeedSpec(0))
    with pytest.raises(GenerationTooLarge):
        brw.sample_limit_recursive(31, SeedSpec(0))
    with pytest.raises(InvalidParams):
        brw.sample_generation(3, -0.1, "plus", SeedSpec(0))
    with pytest.raises(InvalidParams):
        brw.sample_generation(3, 0.1, "sideways", SeedSpec(0))
    with pytest.raises(InvalidParams):
        brw.sample_generation(3, 1.0, "minus", SeedSpec(0))


def test_generation_zero_mean():
    R = 100_000
    for sign, s in (("none", 1.0), ("plus", 1.25), ("minus", 0.75)):
        v = np.array([brw.sample_generation(0, 0.25, sign, SeedSpec(1).replica(i)).values[0] for i in range(R)])
        assert abs(v.mean() - s) <= 4 * v.std(ddof=1) / math.sqrt(R)


def test_x0_is_uniform():
    R = 20_000
    x = [brw.martingale_statistic(brw.sample_generation(0, 0.0, "none", SeedSpec(2).replica(i))) for i in range(R)]
    assert ks_statistic(x, lambda v: np.clip(v, 0, 1)) < 1.95 / math.sqrt(R)
    r = [brw.sample_limit_recursive(0, SeedSpec(3).replica(i)) for i in range(R)]
    assert ks_statistic(r, lambda v: np.clip(v, 0, 1)) < 1.95 / math.sqrt(R)


def test_martingale_increments_coupled():
    R = 4000
    for L in range(0, 13, 3):
        d = []
        for i in range(R):
            s = SeedSpec(4).replica(i)
            a = brw.martingale_statistic(brw.sample_generation(L, 0.0, "none", s))
            b = brw.martingale_statistic(brw.sample_generation(L + 1, 0.0, "none", s))
            d.append(b - a)
        d = np.array(d)
        assert abs(d.mean()) <= 4 * d.std(ddof=1) / math.sqrt(R)


def test_recursion_mean_half():
    R = 10_000
    for L in (1, 3, 6):
        x = np.array([brw.sample_limit_recursive(L, SeedSpec(5, L).replica(i)) for i in range(R)])
        assert abs(x.mean() - 0.5) <= 4 * x.std(ddof=1) / math.sqrt(R)


def test_recursion_matches_heap_at_L6():
    R = 5000
    a = [brw.sample_limit_recursive(6, SeedSpec(6).replica(i)) for i in range(R)]
    b = [brw.martingale_statistic(brw.sample_generation(6, 0.0, "none", SeedSpec(7).replica(i))) for i in range(R)]
    assert ks_two_sample(a, b) <= ks_two_sample_critical(R, R, 1e-3)


def test_extremes_grow_linearly():
    mins, maxs = [], []
    Ls = [10, 12, 14, 16, 18]
    for L in Ls:
        v = [brw.sample_generation(L, 0.0, "none", SeedSpec(8, L).replica(i)).values for i in range(20)]
        mins.append(np.mean([x.min() for x in v]) / L)
        maxs.append(np.mean([x.max() for x in v]) / L)
    # both edges of the cloud move at a positive, bounded speed
    assert 0.1 < min(mins) and max(maxs) < 6.0
    assert max(mins) - min(mins) < 0.15 and max(maxs) - min(maxs) < 0.5


def test_moment_sequence():
    ms = brw.moment_sequence(20)
    assert ms[0] == 1.0 and ms[1] == 0.5
    for k in range(13):
        assert ms.exact[k] == Fraction(math.factorial(k), 2**k)
        assert ms[k] == pytest.approx(math.factorial(k) / 2**k, rel=1e-12)
    # the recursion as written, with a_k on both sides
    for k in range(1, 21):
        rhs = sum(math.comb(k, i) * ms.exact[i] * ms.exact[k - i] for i in range(k + 1)) / (k + 1)
        assert rhs == ms.exact[k]
    with pytest.raises(InvalidParams):
        brw.moment_sequence(21)


def test_vertex_probabilities():
    gen = brw.sample_generation(3, 0.0, "none", SeedSpec(0))
    assert np.allclose(gen.vertex_probabilities(10, 1.0), 1.0 - gen.values / 10)
