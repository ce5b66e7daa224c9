"""Reproducible Monte Carlo experiments over the samplers and the walk."""

from __future__ import annotations

from ..errors import UnknownExperiment
from .core import ExperimentConfig, ExperimentResult, Timer, grid_seed, map_replicas
from .experiments import DEFAULTS, EXPERIMENTS, NEEDS_PARAMS
from .statistics import (
    EmpiricalDistribution,
    chi_square,
    chi_square_critical,
    dkw_radius,
    ks_statistic,
    ks_two_sample,
    ks_two_sample_critical,
    ks_two_sample_pvalue,
)


def run(config: ExperimentConfig) -> ExperimentResult:
    """Run the named experiment; the result is a pure function of ``config`` minus ``workers``."""
    try:
        fn = EXPERIMENTS[config.name]
    except KeyError:
        raise UnknownExperiment(f"unknown experiment {config.name!r}; known: {sorted(EXPERIMENTS)}") from None
    with Timer() as t:
        result = fn(config)
    result.runtime_ms = t.ms
    return result


__all__ = [
    "DEFAULTS",
    "EXPERIMENTS",
    "NEEDS_PARAMS",
    "EmpiricalDistribution",
    "ExperimentConfig",
    "ExperimentResult",
    "chi_square",
    "chi_square_critical",
    "dkw_radius",
    "grid_seed",
    "ks_statistic",
    "ks_two_sample",
    "ks_two_sample_critical",
    "ks_two_sample_pvalue",
    "map_replicas",
    "run",
]
