"""Per-tree functionals: size, height, generation profile, degrees, root masses."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams
from .rng import TAG_VERTEX, SeedSpec, draw64, to_uniform
from .sampler import TemporalTree


@dataclass(frozen=True)
class GenerationProfile:
    """counts[k] = number of vertices at depth k."""

    counts: np.ndarray

    def __post_init__(self):
        self.counts.flags.writeable = False

    def normalized(self, scale: float) -> np.ndarray:
        return self.counts / scale

    def to_csv(self) -> str:
        return _csv(self.counts)


@dataclass(frozen=True)
class DegreeHistogram:
    """counts[k] = number of vertices with exactly k children, k = 0..n."""

    counts: np.ndarray

    def __post_init__(self):
        self.counts.flags.writeable = False

    def at_least(self, k: int) -> int:
        return int(self.counts[k:].sum())

    def to_csv(self) -> str:
        return _csv(self.counts)


@dataclass(frozen=True)
class RootMassVector:
    """Subtree sizes of the m highest-labelled root children, divided by e^{np}."""

    masses: np.ndarray
    raw: np.ndarray

    def __post_init__(self):
        self.masses.flags.writeable = False
        self.raw.flags.writeable = False


def _csv(counts) -> str:
    lines = ["k,count"]
    lines += [f"{k},{int(c)}" for k, c in enumerate(counts)]
    return "\n".join(lines) + "\n"


def size(tree: TemporalTree) -> int:
    return len(tree)


def height(tree: TemporalTree) -> int:
    return int(tree.depth.max())


def generation_profile(tree: TemporalTree) -> GenerationProfile:
    counts = np.bincount(tree.depth, minlength=1).astype(np.int64)
    return GenerationProfile(counts)


def outdegree_histogram(tree: TemporalTree) -> DegreeHistogram:
    counts = np.bincount(tree.outdegree, minlength=tree.params.n + 1).astype(np.int64)
    return DegreeHistogram(counts)


def subtree_sizes(tree: TemporalTree) -> np.ndarray:
    """Number of vertices in the subtree rooted at each node (itself included)."""
    sub = np.ones(len(tree), dtype=np.int64)
    par = tree.parent
    for ids in reversed(tree.levels[1:]):
        np.add.at(sub, par[ids], sub[ids])
    return sub


def root_subtree_masses(tree: TemporalTree, m: int) -> RootMassVector:
    if m < 1:
        raise InvalidParams("m must be >= 1")
    kids = tree.children(0)[:m]
    raw = np.zeros(m, dtype=np.int64)
    if kids.size:
        raw[: kids.size] = subtree_sizes(tree)[kids]
    return RootMassVector(raw / math.exp(tree.params.np), raw)


def uniform_vertex(tree: TemporalTree, seed: SeedSpec) -> int:
    """Id of a vertex chosen uniformly at random (a pure function of the seed)."""
    u = to_uniform(draw64(seed.key_for(TAG_VERTEX), 0))
    return min(int(u * len(tree)), len(tree) - 1)


def depth_of_uniform_vertex(tree: TemporalTree, seed: SeedSpec) -> int:
    return int(tree.depth[uniform_vertex(tree, seed)])


def depth_window_fraction(tree: TemporalTree, lo: float, hi: float) -> float:
    """Fraction of vertices whose depth lies in the closed interval [lo, hi]."""
    d = tree.depth
    return float(np.count_nonzero((d >= lo) & (d <= hi))) / len(tree)
