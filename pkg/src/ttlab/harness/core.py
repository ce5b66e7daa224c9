"""Experiment configs, result documents and the deterministic replica map."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .. import __version__, jsonio
from ..errors import InvalidParams
from ..rng import SeedSpec, draw64
from ..sampler import TreeParams

# Salt for grid-point sub-streams, so they never collide with replica streams.
_GRID_SALT = 0x6A09E667F3BCC908


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines an experiment's output.

    ``workers`` controls parallelism only; it is left out of the echoed
    config because results must not depend on it.
    """

    name: str
    replicas: int
    seed: SeedSpec = SeedSpec(0)
    params: TreeParams | None = None
    extra: dict[str, Any] = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self):
        if not isinstance(self.replicas, (int, np.integer)) or self.replicas < 1:
            raise InvalidParams(f"replicas must be a positive integer, got {self.replicas!r}")
        if not isinstance(self.workers, (int, np.integer)) or self.workers < 1:
            raise InvalidParams(f"workers must be a positive integer, got {self.workers!r}")

    def get(self, key: str, default=None):
        return self.extra.get(key, default)

    def echo(self) -> dict:
        doc: dict[str, Any] = {"name": self.name, "replicas": int(self.replicas)}
        if self.params is not None:
            doc["n"] = self.params.n
            doc["p"] = self.params.p
        doc["extra"] = dict(self.extra)
        return doc


@dataclass
class ExperimentResult:
    name: str
    config: dict
    estimates: dict[str, Any]
    test_statistics: dict[str, Any]
    verdicts: dict[str, bool]
    thresholds: dict[str, Any]
    seed: SeedSpec
    runtime_ms: float = 0.0
    version: str = __version__
    samples: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        missing = [v for v in self.verdicts if v not in self.thresholds]
        if missing:
            raise ValueError(f"verdicts without a recorded threshold: {missing}")

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_dict(self, canonical: bool = False) -> dict:
        doc = {
            "name": self.name,
            "config": self.config,
            "estimates": self.estimates,
            "test_statistics": self.test_statistics,
            "verdicts": {k: bool(v) for k, v in self.verdicts.items()},
            "thresholds": self.thresholds,
            "seed": {"master_seed": int(self.seed.master_seed), "stream_id": int(self.seed.stream_id)},
            "version": self.version,
        }
        if not canonical:
            doc["runtime_ms"] = float(self.runtime_ms)
        return doc

    def to_json(self, canonical: bool = False) -> str:
        return jsonio.dumps(self.to_dict(canonical)) + "\n"

    def canonical_json(self) -> str:
        return self.to_json(canonical=True)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    def dump_samples(self, directory: str | Path) -> list[Path]:
        """Write each stored sample vector as a one-column CSV file."""
        out = []
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        for key, vals in sorted(self.samples.items()):
            path = d / f"{self.name}_{key}.csv"
            lines = [key] + [jsonio.format_real(v) for v in np.asarray(vals, dtype=np.float64).ravel()]
            path.write_text("\n".join(lines) + "\n")
            out.append(path)
        return out


def grid_seed(seed: SeedSpec, j: int) -> SeedSpec:
    """Independent sub-stream for grid point (or sample family) ``j``."""
    return SeedSpec(int(seed.master_seed), draw64(int(seed.stream_id) ^ _GRID_SALT, j))


def map_replicas(fn: Callable[[SeedSpec], Any], seed: SeedSpec, replicas: int, workers: int = 1) -> list:
    """[fn(seed.replica(i)) for i < replicas], computed on ``workers`` threads.

    Output order is replica order whatever the scheduling, so any reduction
    over the returned list is deterministic.
    """
    seeds = [seed.replica(i) for i in range(replicas)]
    if workers <= 1 or replicas == 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seeds))


def replica_keys(seed: SeedSpec, replicas: int, tag: int) -> np.ndarray:
    return np.array([seed.replica(i).key_for(tag) for i in range(replicas)], dtype=np.uint64)


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = (time.perf_counter() - self.t0) * 1000.0


def as_list(x: Sequence) -> list:
    return [v.item() if hasattr(v, "item") else v for v in x]
