"""Run every registered experiment at full size and save one JSON per run.

    python3 scripts/run_experiments.py --out results/ [--only NAME ...] [--workers 1]
"""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

from ttlab.harness import ExperimentConfig, run
from ttlab.rng import SeedSpec
from ttlab.sampler import TreeParams

log = logging.getLogger("run_experiments")

# (label, experiment, replicas, params, extra), sized as in the test suite's acceptance module
PLAN = [
    ("size_limit_n4", "size_limit", 2000, TreeParams(4, 1.0), {}),
    ("size_limit_n8", "size_limit", 2000, TreeParams(8, 1.0), {}),
    ("size_limit_n12", "size_limit", 2000, TreeParams(12, 1.0), {}),
    ("mean_size_n10_p05", "size_limit", 10**4, TreeParams(10, 0.5), {}),
    ("root_mass_n12", "root_mass", 2000, TreeParams(12, 1.0), {"m": 2}),
    ("remark_identity", "remark_identity", 10**5, None, {}),
    ("sampler_equivalence_n2", "sampler_equivalence", 10**4, TreeParams(2, 0.8), {"rejection": False}),
    ("sampler_equivalence_n3", "sampler_equivalence", 10**4, TreeParams(3, 0.7), {"rejection": True}),
    ("sampler_equivalence_n8", "sampler_equivalence", 10**4, TreeParams(8, 1.0), {}),
    ("height_scaling", "height_scaling", 200, None, {}),
    ("depth_concentration_n12", "depth_concentration", 500, TreeParams(12, 1.0), {}),
    ("degree_distribution_n12", "degree_distribution", 2000, TreeParams(12, 1.0), {}),
    ("trimmed_height_n10", "trimmed_height", 500, TreeParams(10, 1.0), {}),
    ("brw_martingale", "brw_martingale", 10**4, None, {}),
    ("cramer_check", "cramer_check", 20_000, None, {}),
]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--only", nargs="*", help="labels or experiment names to run")
    ap.add_argument("--seed", type=int, default=2026)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--dump-samples", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    args.out.mkdir(parents=True, exist_ok=True)
    for j, (label, name, R, P, extra) in enumerate(PLAN):
        if args.only and label not in args.only and name not in args.only:
            continue
        cfg = ExperimentConfig(name, R, SeedSpec(args.seed, j), P, extra, workers=args.workers)
        res = run(cfg)
        res.save(args.out / f"{label}.json")
        if args.dump_samples:
            res.dump_samples(args.out / label)
        failed = [k for k, v in res.verdicts.items() if not v]
        log.info("%-26s %7.1f s  %s", label, res.runtime_ms / 1e3, "ok" if not failed else f"FAILED {failed}")


if __name__ == "__main__":
    main()
