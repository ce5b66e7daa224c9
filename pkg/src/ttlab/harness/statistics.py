"""Goodness-of-fit tools: empirical CDFs, KS distances, DKW bands, chi-square."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special
from scipy.stats import chi2

from ..errors import InvalidParams


@dataclass(frozen=True)
class EmpiricalDistribution:
    samples: np.ndarray

    def __post_init__(self):
        s = np.sort(np.asarray(self.samples, dtype=np.float64))
        if s.size == 0:
            raise InvalidParams("empirical distribution needs at least one sample")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return int(self.samples.size)

    def cdf(self, x) -> np.ndarray:
        return np.searchsorted(self.samples, x, side="right") / self.samples.size

    def quantile(self, q) -> np.ndarray:
        return np.quantile(self.samples, q)

    @property
    def mean(self) -> float:
        return math.fsum(self.samples.tolist()) / len(self)

    @property
    def std(self) -> float:
        return float(np.std(self.samples, ddof=1)) if len(self) > 1 else 0.0

    @property
    def standard_error(self) -> float:
        return self.std / math.sqrt(len(self))


def as_distribution(x) -> EmpiricalDistribution:
    return x if isinstance(x, EmpiricalDistribution) else EmpiricalDistribution(np.asarray(x))


def ks_statistic(samples, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """sup_x |F_emp(x) - cdf(x)|, using both one-sided gaps at every sample."""
    s = as_distribution(samples).samples
    n = s.size
    F = np.asarray(cdf(s), dtype=np.float64)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - F)
    d_minus = np.max(F - (i - 1) / n)
    return float(max(d_plus, d_minus))


def ks_two_sample(a, b) -> float:
    """sup_x |F_a(x) - F_b(x)|, evaluated at every jump point of either sample."""
    a = as_distribution(a).samples
    b = as_distribution(b).samples
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise InvalidParams(f"alpha must lie in (0, 1), got {alpha!r}")


def dkw_radius(n_samples: int, alpha: float) -> float:
    """Half-width eps of the band P(sup |F_emp - F| > eps) <= alpha."""
    if n_samples < 1:
        raise InvalidParams("n_samples must be >= 1")
    _check_alpha(alpha)
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n_samples))


def ks_two_sample_critical(n: int, m: int, alpha: float) -> float:
    """Asymptotic level-alpha critical value of the two-sample KS distance."""
    _check_alpha(alpha)
    return float(special.kolmogi(alpha)) * math.sqrt((n + m) / (n * m))


def ks_two_sample_pvalue(d: float, n: int, m: int) -> float:
    return float(special.kolmogorov(d * math.sqrt(n * m / (n + m))))


def chi_square(observed, probs) -> float:
    """Pearson statistic sum (O - E)^2 / E with E = total * probs."""
    obs = np.asarray(observed, dtype=np.float64)
    pr = np.asarray(probs, dtype=np.float64)
    if obs.shape != pr.shape:
        raise InvalidParams("observed and probs must have the same shape")
    exp = obs.sum() * pr
    return float(np.sum((obs - exp) ** 2 / exp))


def chi_square_critical(bins: int, alpha: float) -> float:
    _check_alpha(alpha)
    return float(chi2.ppf(1.0 - alpha, bins - 1))


def within_se(estimate: float, target: float, se: float, k: float = 4.0) -> bool:
    return abs(estimate - target) <= k * se
