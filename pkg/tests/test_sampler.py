from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ttlab import analytic, stats
from ttlab.errors import BudgetExceeded, DepthCapMissing, InvalidParams, InvalidTree
from ttlab.harness.statistics import chi_square, chi_square_critical, ks_two_sample, ks_two_sample_critical
from ttlab.rng import SeedSpec
from ttlab.sampler import (
    SampleBudget,
    TemporalTree,
    TreeParams,
    find_violation,
    sample_tree_recursive,
    sample_tree_rejection,
    sample_sizes,
    sample_tree_spacings,
    sample_trimmed_tree,
    truncation_bound,
    validate,
)

small_params = st.builds(
    TreeParams, st.integers(1, 6), st.floats(0.0, 1.0, allow_nan=False)
)
seeds = st.builds(SeedSpec, st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1))
REJ = SampleBudget(depth_cap=10)


def _same(a: TemporalTree, b: TemporalTree) -> bool:
    return (
        len(a) == len(b)
        and np.array_equal(a.label, b.label)
        and np.array_equal(a.parent, b.parent)
        and np.array_equal(a.child_ptr, b.child_ptr)
    )


# ------------------------------------------------------------ params


def test_params_validation():
    with pytest.raises(InvalidParams):
        TreeParams(0, 0.5)
    with pytest.raises(InvalidParams):
        TreeParams(2, 1.5)
    with pytest.raises(InvalidParams):
        SampleBudget(0)
    assert TreeParams(3, 1).p == 1.0


def test_degenerate_p0():
    t = sample_tree_recursive(TreeParams(5, 0.0), SeedSpec(1))
    assert len(t) == 1 and t.label[0] == 0.0
    assert len(sample_tree_spacings(TreeParams(5, 0.0), SeedSpec(1))) == 1


# ------------------------------------------------------------ invariants


@given(small_params, seeds)
def test_every_sampler_emits_valid_trees(P, seed):
    for t in (
        sample_tree_recursive(P, seed),
        sample_tree_spacings(P, seed),
        sample_tree_rejection(P, seed, REJ),
        sample_trimmed_tree(P, max(1, P.n // 2), seed),
    ):
        assert find_violation(t) is None
        assert t.label[0] == P.p


@given(small_params, seeds)
def test_bit_determinism(P, seed):
    for fn in (sample_tree_recursive, sample_tree_spacings):
        assert _same(fn(P, seed), fn(P, seed))
    assert _same(sample_tree_rejection(P, seed, REJ), sample_tree_rejection(P, seed, REJ))


@given(st.builds(TreeParams, st.integers(1, 3), st.floats(0.0, 1.0)), seeds, st.integers(0, 5))
def test_lazy_rejection_equals_full_materialization(P, seed, D):
    b = SampleBudget(depth_cap=D)
    assert _same(sample_tree_rejection(P, seed, b), sample_tree_rejection(P, seed, b, exhaustive=True))


@given(small_params, seeds)
def test_trim_with_K_equal_n_is_identity(P, seed):
    assert _same(sample_trimmed_tree(P, P.n, seed), sample_tree_recursive(P, seed))


@given(small_params, seeds, st.data())
def test_trimmed_tree_is_subtree(P, seed, data):
    K = data.draw(st.integers(1, P.n))
    full = sample_tree_recursive(P, seed)
    trim = sample_trimmed_tree(P, K, seed)
    assert stats.height(trim) <= stats.height(full)
    assert len(trim) <= len(full)
    assert trim.outdegree.max() <= K
    # every trimmed label occurs in the untrimmed tree
    assert np.isin(trim.label, full.label).all()


def test_spacings_root_gets_all_children_at_p1():
    for i in range(50):
        t = sample_tree_spacings(TreeParams(7, 1.0), SeedSpec(3, i))
        assert len(t.children(0)) == 7


def test_trimmed_rejects_bad_K():
    with pytest.raises(InvalidParams):
        sample_trimmed_tree(TreeParams(3, 1.0), 4, SeedSpec(0))
    with pytest.raises(InvalidParams):
        sample_trimmed_tree(TreeParams(3, 1.0), 0, SeedSpec(0))


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        sample_tree_recursive(TreeParams(10, 1.0), SeedSpec(0), SampleBudget(node_cap=50))
    with pytest.raises(BudgetExceeded):
        sample_tree_rejection(TreeParams(4, 1.0), SeedSpec(0), SampleBudget(node_cap=10, depth_cap=6), exhaustive=True)


def test_rejection_needs_depth_cap():
    with pytest.raises(DepthCapMissing):
        sample_tree_rejection(TreeParams(2, 1.0), SeedSpec(0), SampleBudget())


def test_rejection_depth_zero_is_root():
    t = sample_tree_rejection(TreeParams(2, 1.0), SeedSpec(0), SampleBudget(depth_cap=0))
    assert len(t) == 1


def test_rejection_truncation_bound():
    t = sample_tree_rejection(TreeParams(3, 1.0), SeedSpec(0), SampleBudget(depth_cap=14))
    direct = math.fsum(3.0**k / math.factorial(k) for k in range(15, 80))
    assert t.truncation_bound >= direct
    assert t.truncation_bound < 1e-4
    assert truncation_bound(3.0, 14) == pytest.approx(direct, rel=1e-2)


# ------------------------------------------------------------ n = 1 law


def test_n1_law_by_enumerating_orderings():
    # Depth of the longest decreasing prefix of 4 iid labels, over all 4! orders.
    counts = [0] * 5
    for perm in itertools.permutations(range(4)):
        d = 0
        prev = math.inf
        for v in perm:
            if v < prev:
                d += 1
                prev = v
            else:
                break
        counts[d] += 1
    # P(depth >= k) = 1/k!  for k <= 4
    for k in range(1, 5):
        assert sum(counts[k:]) / 24 == pytest.approx(1 / math.factorial(k))


@pytest.mark.parametrize("sampler", ["recursive", "spacings", "rejection", "trimmed"])
def test_n1_size_law_chi_square(sampler):
    P = TreeParams(1, 1.0)
    R = 20_000
    fn = {
        "recursive": lambda s: sample_tree_recursive(P, s),
        "spacings": lambda s: sample_tree_spacings(P, s),
        "rejection": lambda s: sample_tree_rejection(P, s, SampleBudget(depth_cap=12)),
        "trimmed": lambda s: sample_trimmed_tree(P, 1, s),
    }[sampler]
    sizes = np.array([len(fn(SeedSpec(11).replica(i))) for i in range(R)])
    obs = np.array([np.sum(sizes == m) for m in range(2, 7)] + [np.sum(sizes >= 7)])
    pr = [analytic.size_pmf_n1(m) for m in range(2, 7)]
    pr.append(1.0 - sum(pr) - analytic.size_pmf_n1(1))
    assert np.sum(sizes == 1) == 0
    assert chi_square(obs, pr) < chi_square_critical(len(pr), 1e-3)


# ------------------------------------------------------------ equivalence


@pytest.mark.parametrize("n,p", [(2, 0.8), (3, 0.7)])
def test_samplers_agree_in_law(n, p):
    P = TreeParams(n, p)
    R = 3000
    D = 14
    out = {}
    for j, fn in enumerate(
        (
            lambda s: sample_tree_recursive(P, s),
            lambda s: sample_tree_spacings(P, s),
            lambda s: sample_tree_rejection(P, s, SampleBudget(depth_cap=D)),
        )
    ):
        trees = [fn(SeedSpec(100 + j).replica(i)) for i in range(R)]
        out[j] = (np.array([len(t) for t in trees]), np.array([stats.height(t) for t in trees]))
    assert truncation_bound(P.np, D) < 1e-6
    crit = ks_two_sample_critical(R, R, 1e-3)
    for a, b in itertools.combinations(range(3), 2):
        for col in range(2):
            assert ks_two_sample(out[a][col], out[b][col]) <= crit


def test_mean_size_small():
    P = TreeParams(4, 1.0)
    s = np.array([len(sample_tree_recursive(P, SeedSpec(5).replica(i))) for i in range(4000)])
    assert abs(s.mean() - math.exp(4)) <= 4 * s.std(ddof=1) / math.sqrt(s.size)


# ------------------------------------------------------------ storage


@given(small_params, seeds)
def test_json_roundtrip_exact(P, seed):
    t = sample_tree_spacings(P, seed, SampleBudget(node_cap=5000)) if math.exp(P.np) < 200 else None
    if t is None:
        return
    back = TemporalTree.from_json(t.to_json())
    assert _same(t, back)
    assert np.array_equal(back.depth, t.depth)
    assert back.params == t.params


def test_node_records():
    t = sample_tree_recursive(TreeParams(3, 1.0), SeedSpec(2))
    root = t.node(0)
    assert root.parent is None and root.depth == 0 and root.label == 1.0
    for node in t.nodes():
        for c in node.children:
            assert t.node(c).parent == node.id
        labels = [t.label[c] for c in node.children]
        assert labels == sorted(labels, reverse=True)
    assert isinstance(t.to_dict()["nodes"][0]["parent"], type(None))


def _doc(nodes, n=2, p=1.0):
    return {"n": n, "p": p, "nodes": nodes}


def test_violations_on_constructed_trees():
    assert find_violation(TemporalTree.from_dict(_doc([]))) == "missing root"
    bad = _doc(
        [
            {"id": 0, "parent": None, "label": 1.0, "children": [1]},
            {"id": 1, "parent": 0, "label": 0.3, "children": [2]},
            {"id": 2, "parent": 1, "label": 0.6, "children": []},
        ]
    )
    assert find_violation(TemporalTree.from_dict(bad)).startswith("non-decreasing edge")
    order = _doc(
        [
            {"id": 0, "parent": None, "label": 1.0, "children": [1, 2]},
            {"id": 1, "parent": 0, "label": 0.3, "children": []},
            {"id": 2, "parent": 0, "label": 0.6, "children": []},
        ]
    )
    assert "decreasing label order" in find_violation(TemporalTree.from_dict(order))
    wide = _doc(
        [{"id": 0, "parent": None, "label": 1.0, "children": [1, 2, 3]}]
        + [{"id": i, "parent": 0, "label": 1.0 - 0.1 * i, "children": []} for i in (1, 2, 3)]
    )
    assert "> n=2" in find_violation(TemporalTree.from_dict(wide))
    with pytest.raises(InvalidTree):
        validate(TemporalTree.from_dict(bad))
    with pytest.raises(InvalidTree):
        TemporalTree.from_dict({"n": 2})


@given(small_params, seeds)
def test_batched_sizes_match_per_tree_samplers(P, seed):
    if math.exp(P.np) > 300:
        return
    for name, fn in (("recursive", sample_tree_recursive), ("spacings", sample_tree_spacings)):
        size, height = sample_sizes(P, seed, 5, name)
        trees = [fn(P, seed.replica(i)) for i in range(5)]
        assert list(size) == [len(t) for t in trees]
        assert list(height) == [stats.height(t) for t in trees]


def test_batched_sizes_errors():
    with pytest.raises(InvalidParams):
        sample_sizes(TreeParams(2, 1.0), SeedSpec(0), 3, "rejection")
    with pytest.raises(BudgetExceeded):
        sample_sizes(TreeParams(10, 1.0), SeedSpec(0), 3, budget=SampleBudget(node_cap=50))
    assert sample_sizes(TreeParams(2, 1.0), SeedSpec(0), 0)[0].size == 0
