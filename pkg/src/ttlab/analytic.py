"""Exact formulas, truncated series and large-deviation quantities.

Every truncated series returns a :class:`SeriesValue` whose ``tail_bound``
is a rigorous bound on the neglected terms.  Sums are accumulated with
``math.fsum`` from log-space terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, InvalidParams, TailBoundTooLarge


@dataclass(frozen=True)
class SeriesValue:
    value: float
    terms_used: int
    tail_bound: float


@dataclass(frozen=True)
class RateFunctionResult:
    value: float
    maximizer: float
    upper_bound: float
    phi_k: float


def _check_np(n, p):
    if n < 1 or not 0.0 <= p <= 1.0:
        raise InvalidParams(f"need n >= 1 and 0 <= p <= 1, got n={n}, p={p}")


def expected_size(n: int, p: float) -> float:
    _check_np(n, p)
    return math.exp(n * p)


def expected_generation_size(n: int, p: float, k: int) -> float:
    """(np)^k / k!: the expected number of vertices at depth k."""
    _check_np(n, p)
    if k < 0:
        raise InvalidParams("k must be >= 0")
    x = n * p
    if k == 0:
        return 1.0
    if x == 0.0:
        return 0.0
    return math.exp(k * math.log(x) - math.lgamma(k + 1))


def size_pmf_n1(m: int) -> float:
    """P(|T_{1,1}| = m) = (m - 1) / m!."""
    if m < 1:
        raise InvalidParams("m must be >= 1")
    if m == 1:
        return 0.0
    return math.exp(math.log(m - 1) - math.lgamma(m + 1))


def _log_term(x: float, k: int) -> float:
    return k * math.log(x) - math.lgamma(k + 1)


def poisson_tail_sum(x: float, K: int) -> float:
    """Upper bound on sum_{k > K} x^k / k!.

    Terms are summed explicitly until their ratio x/(k+1) drops below 1/2,
    then the rest is bounded by a geometric series.
    """
    if x <= 0.0:
        return 0.0
    if K < -1:
        K = -1
    k = K + 1
    parts = []
    while (k + 1) <= 2.0 * x:
        parts.append(math.exp(_log_term(x, k)))
        k += 1
    t = math.exp(_log_term(x, k))
    r = x / (k + 1)
    parts.append(t / (1.0 - r))
    return math.fsum(parts)


def second_moment_upper_series(n: int, p: float, l_max: int | None = None, rel_tol: float = 1e-6) -> SeriesValue:
    """Upper bound on E|T_{n,p}|^2 from the three-part decomposition I + II + III.

    With x = np:  I = e^x,  II = sum_l (2x)^l / l!,
    III = sum_{l>=1} sum_{m=1}^{l} x^l/l! * x^m/m! * (1 + l/m),
    the last coming from bounding the inner sum over the overlap length by a
    geometric series.  II and III are truncated at l <= l_max.
    """
    _check_np(n, p)
    x = n * p
    if l_max is None:
        l_max = int(4.0 * x + 10.0 * math.sqrt(2.0 * x + 1.0) + 30)
    L = int(l_max)
    if L < 1:
        raise InvalidParams("l_max must be >= 1")
    part_i = math.exp(x)
    if x == 0.0:
        # only the root: |T| = 1
        return SeriesValue(2.0, 1, 0.0)
    two_x = 2.0 * x
    part_ii = math.fsum(math.exp(_log_term(two_x, l)) for l in range(L + 1))
    logfac = [_log_term(x, m) for m in range(L + 1)]
    iii_terms = []
    for l in range(1, L + 1):
        for m in range(1, l + 1):
            iii_terms.append(math.exp(logfac[l] + logfac[m]) * (1.0 + l / m))
    part_iii = math.fsum(iii_terms)
    tail = poisson_tail_sum(two_x, L) + math.expm1(x) * (
        poisson_tail_sum(x, L) + x * poisson_tail_sum(x, L - 1)
    )
    if tail >= rel_tol * math.exp(two_x):
        raise TailBoundTooLarge(f"tail bound {tail:.3g} with l_max={L}; increase l_max")
    return SeriesValue(math.fsum([part_i, part_ii, part_iii]), L + 1, tail)


def expected_outdegree_ge_series(n: int, k: int, l_max: int | None = None, rel_tol: float = 1e-12) -> SeriesValue:
    """E L_{n,>=k} at p = 1: sum_{l>=0} n^l/l! prod_{i<k} 1/(1 + l/(n-i)).

    The l = 0 term is the root (which has all n children when p = 1).
    """
    if n < 1:
        raise InvalidParams("n must be >= 1")
    if not 0 <= k <= n:
        raise InvalidParams(f"need 0 <= k <= n, got k={k}, n={n}")
    if l_max is None:
        l_max = int(n + 12.0 * math.sqrt(n) + 40)
    L = int(l_max)
    logn = math.log(n)
    terms = []
    for l in range(L + 1):
        lt = l * logn - math.lgamma(l + 1)
        for i in range(k):
            lt -= math.log1p(l / (n - i))
        terms.append(math.exp(lt))
    value = math.fsum(terms)
    tail = poisson_tail_sum(float(n), L)
    if tail > rel_tol * value:
        raise TailBoundTooLarge(f"tail bound {tail:.3g} with l_max={L}; increase l_max")
    return SeriesValue(value, L + 1, tail)


def degree_limit(k: int) -> float:
    if k < 0:
        raise InvalidParams("k must be >= 0")
    return 2.0 ** -(k + 1)


# ------------------------------------------------------------ gamma mixture

_TAYLOR_CUTOFF = 1e-6


def mixture_mgf(k: int, lam: float) -> float:
    """E exp(lam X) for X ~ Gamma(K), K uniform on {1, ..., k}.

    Equals (1/k) sum_{i=1}^k (1 - lam)^{-i}; finite only for lam < 1.
    """
    if k < 1:
        raise InvalidParams("k must be >= 1")
    if lam >= 1.0:
        raise DomainError(f"MGF is infinite for lambda >= 1 (got {lam})")
    if abs(lam) < _TAYLOR_CUTOFF:
        return 1.0 + lam * (k + 1) / 2.0 + lam * lam * (k + 1) * (k + 2) / 6.0
    # -1/(k lam) * (1 - (1-lam)^{-k}), written to avoid cancellation
    return math.expm1(-k * math.log1p(-lam)) / (k * lam)


def log_mixture_mgf(k: int, lam: float) -> float:
    return math.log(mixture_mgf(k, lam))


def _objective(k: int, x: float, lam: float) -> float:
    return lam * x - log_mixture_mgf(k, lam)


def rate_function(k: int, x: float, tol: float = 1e-10) -> RateFunctionResult:
    """Legendre-Fenchel transform I(x) = sup_lam (lam x - log E e^{lam X}).

    For 0 < x < (k+1)/2 the supremum is attained at some lam* < 0; it is
    located by golden-section search on the strictly concave objective.
    Also returns phi(k) = -log(1 - (1 - lam*)^{-k}) >= 0 and the upper bound
    log k - log x - 1 + phi(k).
    """
    if k < 1:
        raise InvalidParams("k must be >= 1")
    if not 0.0 < x < (k + 1) / 2.0:
        raise DomainError(f"need 0 < x < (k+1)/2 = {(k + 1) / 2}, got x={x}")
    J = lambda lam: _objective(k, x, lam)  # noqa: E731
    assert J(0.0) == 0.0
    lo, hi = -max(10.0, 4.0 * k / x), -1e-12
    while J(lo) >= J(lo / 2.0):
        lo *= 2.0
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = J(c), J(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = J(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = J(d)
    lam = 0.5 * (a + b)
    value = J(lam)
    # 1 - (1 - lam)^{-k}, accurately
    gap = -math.expm1(-k * math.log1p(-lam))
    phi = -math.log(gap)
    upper = math.log(k) - math.log(x) - 1.0 + phi
    return RateFunctionResult(max(value, 0.0), lam, upper, phi)


def exp_cdf(x: float) -> float:
    return max(0.0, -math.expm1(-x)) if x > 0 else 0.0
