from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from ttlab import analytic
from ttlab.errors import InvalidParams, UnknownExperiment
from ttlab.harness import (
    DEFAULTS,
    EXPERIMENTS,
    EmpiricalDistribution,
    ExperimentConfig,
    chi_square,
    chi_square_critical,
    dkw_radius,
    ks_statistic,
    ks_two_sample,
    ks_two_sample_critical,
    map_replicas,
    run,
)
from ttlab.harness.experiments import reference_root_masses, tilted_lower_tail, tilted_probabilities
from ttlab.rng import SeedSpec, exponentials, uniforms
from ttlab.sampler import TreeParams

# ------------------------------------------------------------ statistics


def test_empirical_distribution():
    d = EmpiricalDistribution(np.array([3.0, 1.0, 2.0]))
    assert list(d.samples) == [1.0, 2.0, 3.0]
    assert d.cdf(2.0) == pytest.approx(2 / 3)
    assert d.mean == 2.0
    with pytest.raises(InvalidParams):
        EmpiricalDistribution(np.array([]))


def test_ks_trivial_cases():
    assert ks_statistic([0.5], lambda x: np.clip(x, 0, 1)) == 0.5
    x = np.array([0.1, 0.4, 0.4, 2.0])
    assert ks_two_sample(x, x.copy()) == 0.0


@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=50))
def test_ks_matches_brute_force(xs):
    cdf = lambda v: 1 / (1 + np.exp(-np.asarray(v)))  # noqa: E731
    d = ks_statistic(xs, cdf)
    s = np.sort(xs)
    grid = np.concatenate([s, s - 1e-9, s + 1e-9])
    emp = np.searchsorted(s, grid, side="right") / s.size
    assert d >= np.max(np.abs(emp - cdf(grid))) - 1e-8
    assert 0 <= d <= 1


@given(
    st.lists(st.integers(0, 6), min_size=1, max_size=40),
    st.lists(st.integers(0, 6), min_size=1, max_size=40),
)
def test_two_sample_ks_matches_brute_force(a, b):
    grid = np.arange(-1, 8)
    fa = np.array([np.mean(np.array(a) <= g) for g in grid])
    fb = np.array([np.mean(np.array(b) <= g) for g in grid])
    assert ks_two_sample(a, b) == pytest.approx(np.max(np.abs(fa - fb)))


def test_dkw_radius():
    assert dkw_radius(10**4, 1e-3) == pytest.approx(0.0195, abs=1e-4)
    assert dkw_radius(4 * 10**4, 1e-3) == pytest.approx(dkw_radius(10**4, 1e-3) / 2)
    with pytest.raises(InvalidParams):
        dkw_radius(10, 2.0)
    with pytest.raises(InvalidParams):
        dkw_radius(0, 0.1)


@pytest.mark.parametrize("law", ["uniform", "exponential"])
def test_dkw_calibration(law):
    trials, n = 200, 10**4
    r = dkw_radius(n, 1e-3)
    inside = 0
    for t in range(trials):
        key = SeedSpec(40, t).key
        if law == "uniform":
            x, cdf = uniforms(key, np.arange(n)), (lambda v: v)
        else:
            x, cdf = exponentials(key, np.arange(n)), (lambda v: -np.expm1(-v))
        inside += ks_statistic(x, cdf) <= r
    assert inside >= 0.99 * trials


def test_dkw_exceedance_frequency_at_loose_alpha():
    trials, n, alpha = 400, 500, 0.2
    r = dkw_radius(n, alpha)
    over = sum(ks_statistic(uniforms(SeedSpec(41, t).key, np.arange(n)), lambda v: v) > r for t in range(trials))
    # DKW is conservative: the exceedance rate stays at or below alpha (binomial slack)
    assert over / trials <= alpha + 3 * math.sqrt(alpha * (1 - alpha) / trials)


def test_two_sample_critical_value():
    c = ks_two_sample_critical(1000, 1000, 0.05)
    assert c == pytest.approx(1.358 * math.sqrt(2 / 1000), rel=1e-3)


def test_chi_square():
    assert chi_square([10, 10], [0.5, 0.5]) == 0.0
    assert chi_square([15, 5], [0.5, 0.5]) == pytest.approx(5.0)
    assert chi_square_critical(2, 0.05) == pytest.approx(3.841, abs=1e-3)


# ------------------------------------------------------------ run()


def test_unknown_experiment():
    with pytest.raises(UnknownExperiment):
        run(ExperimentConfig("nope", 1))


def test_unknown_extra_parameter():
    with pytest.raises(InvalidParams):
        run(ExperimentConfig("remark_identity", 10, extra={"bogus": 1}))


def test_config_validation():
    with pytest.raises(InvalidParams):
        ExperimentConfig("size_limit", 0)
    with pytest.raises(InvalidParams):
        ExperimentConfig("size_limit", 5, workers=0)
    with pytest.raises(InvalidParams):
        run(ExperimentConfig("size_limit", 5))


def test_single_replica_size_limit():
    r = run(ExperimentConfig("size_limit", 1, SeedSpec(1), TreeParams(4, 1.0)))
    assert r.samples["normalized_size"].shape == (1,)
    assert r.config["replicas"] == 1


SMALL = {
    "size_limit": (30, TreeParams(4, 1.0), {}),
    "root_mass": (30, TreeParams(4, 1.0), {}),
    "remark_identity": (200, None, {}),
    "height_scaling": (10, None, {"n_grid": [2, 4, 6]}),
    "depth_concentration": (20, TreeParams(4, 1.0), {}),
    "degree_distribution": (20, TreeParams(4, 1.0), {"limit_n": 20}),
    "sampler_equivalence": (30, TreeParams(2, 0.8), {}),
    "trimmed_height": (20, TreeParams(4, 1.0), {}),
    "brw_martingale": (20, None, {"L_grid": [0, 2], "ratio_grid": [2, 4], "ks_L": 5}),
    "cramer_check": (200, None, {"n_grid": [10]}),
}


def test_every_experiment_has_a_small_case():
    assert set(SMALL) == set(EXPERIMENTS) == set(DEFAULTS)


@pytest.mark.parametrize("name", sorted(SMALL))
def test_results_independent_of_workers(name):
    R, P, extra = SMALL[name]
    a = run(ExperimentConfig(name, R, SeedSpec(5, 2), P, extra, workers=1))
    b = run(ExperimentConfig(name, R, SeedSpec(5, 2), P, extra, workers=4))
    assert a.canonical_json() == b.canonical_json()
    doc = a.to_dict()
    assert set(doc) == {
        "name", "config", "estimates", "test_statistics", "verdicts", "thresholds", "seed", "runtime_ms", "version"
    }
    assert "runtime_ms" not in a.to_dict(canonical=True)
    assert set(a.verdicts) <= set(a.thresholds)
    c = run(ExperimentConfig(name, R, SeedSpec(5, 3), P, extra))
    assert c.canonical_json() != a.canonical_json()


def test_map_replicas_order():
    out = map_replicas(lambda s: s.stream_id, SeedSpec(1, 9), 50, workers=5)
    assert out == [SeedSpec(1, 9).replica(i).stream_id for i in range(50)]


def test_dump_samples(tmp_path):
    r = run(ExperimentConfig("remark_identity", 5, SeedSpec(1)))
    paths = r.dump_samples(tmp_path)
    lines = paths[0].read_text().strip().split("\n")
    assert lines[0] == "sum" and len(lines) == 6
    assert float(lines[1]) == r.samples["sum"][0]


# ------------------------------------------------------------ oracles


def test_remark_term_mean_by_integration():
    # E[E_2 U_1 U_2] computed by integrating over (e, u1, u2)
    val = integrate.nquad(lambda e, u1, u2: e * math.exp(-e) * u1 * u2, [[0, 60], [0, 1], [0, 1]])[0]
    assert val == pytest.approx(2.0**-2, rel=1e-8)


def test_reference_root_masses():
    ref = reference_root_masses(SeedSpec(3), 50_000, 3)
    for i in range(3):
        se = ref[:, i].std(ddof=1) / math.sqrt(ref.shape[0])
        assert abs(ref[:, i].mean() - 2.0 ** -(i + 1)) <= 4 * se
    assert np.all(ref > 0)


def exact_lower_tail(k: int, x: float, n: int) -> float:
    """P(sum of n gamma mixtures <= n x): mix the shape distribution of K_1+...+K_n."""
    pk = np.full(k, 1.0 / k)
    dist = np.array([1.0])
    for _ in range(n):
        dist = np.convolve(dist, pk)
    shapes = n + np.arange(dist.size)  # sum of K_i ranges over n..n k
    return float(np.sum(dist * special.gammainc(shapes, n * x)))


@pytest.mark.parametrize("n", [10, 50])
def test_tilted_estimator_matches_exact(n):
    k, x = 2, 0.8
    lam = analytic.rate_function(k, x).maximizer
    est, se, hits = tilted_lower_tail(k, x, n, 20_000, SeedSpec(8), lam)
    assert hits >= 50
    assert abs(est - exact_lower_tail(k, x, n)) <= 4 * se


def test_tilted_probabilities():
    p = tilted_probabilities(3, -0.5)
    assert p.sum() == pytest.approx(1.0)
    assert p[0] > p[1] > p[2]
    assert np.allclose(tilted_probabilities(3, 0.0), 1 / 3)


def test_exact_tail_rate_between_bounds():
    r = analytic.rate_function(2, 0.8)
    for n in (50, 100, 400):
        rate = -math.log(exact_lower_tail(2, 0.8, n)) / n
        assert r.value <= rate <= r.upper_bound
