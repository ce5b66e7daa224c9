"""Branching random walk on the infinite binary tree.

Vertex ``i`` of the binary tree (heap order: children of ``i`` are ``2i+1``
and ``2i+2``) carries an Exp(1) step drawn from counter ``i`` of the walk
key.  Its value ``Q_i`` is the sum of the steps on its root path, times a
scale ``s`` in {1, 1+eps, 1-eps}.  Because the steps do not depend on the
scale, the three signs share randomness and are ordered pathwise.

Values are stored already multiplied by ``n`` so nothing here depends on n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numba
import numpy as np

from .errors import GenerationTooLarge, InvalidParams
from .rng import TAG_RECURSION, TAG_WALK, SeedSpec, nb_uniform

MAX_GENERATION = 24
MAX_RECURSION = 30
MAX_MOMENT = 20

SIGNS = ("none", "plus", "minus")


@dataclass(frozen=True)
class BrwGeneration:
    L: int
    eps: float
    sign: str
    values: np.ndarray

    def __post_init__(self):
        self.values.flags.writeable = False

    @property
    def scale(self) -> float:
        return step_scale(self.eps, self.sign)

    def vertex_probabilities(self, n: int, p: float) -> np.ndarray:
        """Labels p - Q_i / n of the matching vertices of the n-ary tree."""
        return p - self.values / n


@dataclass(frozen=True)
class MomentSequence:
    """a[k] = E X^k for the limit X of the martingale statistic."""

    a: tuple[float, ...]
    exact: tuple[Fraction, ...]

    def __len__(self) -> int:
        return len(self.a)

    def __getitem__(self, k: int) -> float:
        return self.a[k]


def step_scale(eps: float, sign: str) -> float:
    if sign not in SIGNS:
        raise InvalidParams(f"sign must be one of {SIGNS}, got {sign!r}")
    if eps < 0 or not math.isfinite(eps):
        raise InvalidParams(f"eps must be a finite number >= 0, got {eps!r}")
    if sign == "plus":
        return 1.0 + eps
    if sign == "minus":
        if eps >= 1.0:
            raise InvalidParams("eps must be < 1 for sign='minus' (steps must stay positive)")
        return 1.0 - eps
    return 1.0


@numba.njit(cache=True, nogil=True)
def _generation(key, L):
    prev = np.empty(1, dtype=np.float64)
    prev[0] = -math.log(nb_uniform(key, 0))
    for d in range(1, L + 1):
        base = (1 << d) - 1
        m = 1 << d
        cur = np.empty(m, dtype=np.float64)
        for j in range(m):
            cur[j] = prev[j >> 1] - math.log(nb_uniform(key, base + j))
        prev = cur
    return prev


def _check_L(L: int, cap: int) -> None:
    if not isinstance(L, (int, np.integer)) or L < 0:
        raise InvalidParams(f"L must be a nonnegative integer, got {L!r}")
    if L > cap:
        raise GenerationTooLarge(f"L={L} exceeds the supported maximum {cap}")


def sample_generation(L: int, eps: float, sign: str, seed: SeedSpec) -> BrwGeneration:
    """Generation-L values of the walk, in heap order (leftmost vertex first)."""
    _check_L(L, MAX_GENERATION)
    s = step_scale(eps, sign)
    raw = _generation(np.uint64(seed.key_for(TAG_WALK)), int(L))
    values = raw if s == 1.0 else raw * s
    return BrwGeneration(int(L), float(eps), sign, values)


@numba.njit(cache=True, nogil=True)
def _exp_sum(values):
    # Neumaier compensated summation of exp(-v), in index order.
    s = 0.0
    comp = 0.0
    for v in values:
        t = math.exp(-v)
        u = s + t
        if abs(s) >= t:
            comp += (s - u) + t
        else:
            comp += (t - u) + s
        s = u
    return s + comp


def martingale_statistic(gen: BrwGeneration) -> float:
    """X_L = sum_i exp(-Q_i), with compensated summation in heap order."""
    return float(_exp_sum(gen.values))


def max_ratio(gen: BrwGeneration) -> float:
    """max_i exp(-Q_i) / X_L."""
    return math.exp(-float(gen.values.min())) / martingale_statistic(gen)


def walk_summary(L: int, eps: float, sign: str, seed: SeedSpec) -> tuple[float, float]:
    """(X_L, max ratio) of one generation without keeping it."""
    gen = sample_generation(L, eps, sign, seed)
    x = martingale_statistic(gen)
    return x, math.exp(-float(gen.values.min())) / x


@numba.njit(cache=True, nogil=True)
def _recursive_limit(key, L):
    # Post-order walk over the heap-indexed recursion tree with an O(L) stack:
    # pend[d] holds the finished value of a left child at depth d.
    pend = np.empty(L + 1, dtype=np.float64)
    first_leaf = (1 << L) - 1
    out = 0.0
    for j in range(1 << L):
        idx = first_leaf + j
        d = L
        v = nb_uniform(key, idx)
        while d > 0:
            if idx & 1:
                pend[d] = v
                break
            par = (idx >> 1) - 1
            v = nb_uniform(key, par) * (pend[d] + v)
            idx = par
            d -= 1
        if d == 0:
            out = v
    return out


def sample_limit_recursive(L: int, seed: SeedSpec) -> float:
    """X_L from X_0 ~ Uniform(0,1) and X_L = U (X'_{L-1} + X''_{L-1}); cost 2^L."""
    _check_L(L, MAX_RECURSION)
    return float(_recursive_limit(np.uint64(seed.key_for(TAG_RECURSION)), int(L)))


def moment_sequence(k_max: int) -> MomentSequence:
    """Moments from a_k = (1/(k+1)) sum_{i=0}^k C(k,i) a_i a_{k-i}, a_0 = 1, a_1 = 1/2.

    The i = 0 and i = k terms contain a_k itself; moving them to the left
    leaves a_k = sum_{i=1}^{k-1} C(k,i) a_i a_{k-i} / (k-1) for k >= 2,
    evaluated in exact rational arithmetic.
    """
    if not 0 <= k_max <= MAX_MOMENT:
        raise InvalidParams(f"k_max must lie in [0, {MAX_MOMENT}]")
    a = [Fraction(1), Fraction(1, 2)][: k_max + 1]
    for k in range(2, k_max + 1):
        s = sum(math.comb(k, i) * a[i] * a[k - i] for i in range(1, k))
        a.append(s / (k - 1))
    return MomentSequence(tuple(float(x) for x in a), tuple(a))
