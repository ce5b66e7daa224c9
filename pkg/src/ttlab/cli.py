"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 runtime error.  Data goes to stdout
(or ``--out``); the effective configuration and all diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, analytic, brw, harness, jsonio, stats
from .errors import InvalidParams, InvalidTree, TTLabError
from .rng import SeedSpec
from .sampler import (
    DEFAULT_NODE_CAP,
    SampleBudget,
    TemporalTree,
    TreeParams,
    find_violation,
    sample_tree_recursive,
    sample_tree_rejection,
    sample_tree_spacings,
    sample_trimmed_tree,
)

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("must be an unsigned 64-bit integer")
    return v


def _add_seed(p):
    p.add_argument("--seed", type=_u64, default=0, help="master seed (default 0)")
    p.add_argument("--stream", type=_u64, default=0, help="stream id (default 0)")


def _add_out(p, formats=("json",)):
    p.add_argument("--out", type=Path, default=None, help="write data here instead of stdout")
    p.add_argument("--format", choices=formats, default=formats[0], help=f"output format (default {formats[0]})")


def _add_tree(p, n_default=None, p_default=None):
    p.add_argument("--n", type=int, default=n_default, required=n_default is None, help="branching factor n")
    p.add_argument("--p", type=float, default=p_default, required=p_default is None, help="percolation level p")


def _add_budget(p):
    p.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP, help="abort above this many nodes (default 2^27)")
    p.add_argument("--depth-cap", type=int, default=None, help="depth cap (rejection sampler only)")


# experiment name -> list of (flag, kwargs, extra key)
_EXPERIMENT_FLAGS = {
    "size_limit": [("--ks-tol", dict(type=float), "ks_tol"), ("--alpha", dict(type=float), "alpha"),
                   ("--sampler", dict(choices=["recursive", "spacings"]), "sampler")],
    "root_mass": [("--m", dict(type=int), "m"), ("--alpha", dict(type=float), "alpha")],
    "remark_identity": [("--N", dict(type=int), "N"), ("--alpha", dict(type=float), "alpha")],
    "height_scaling": [("--p", dict(type=float), "p"), ("--n-grid", dict(type=_int_list), "n_grid")],
    "depth_concentration": [("--eps", dict(type=float), "eps"), ("--min-fraction", dict(type=float), "min_fraction")],
    "degree_distribution": [("--k", dict(type=int), "k_max")],
    "sampler_equivalence": [("--alpha", dict(type=float), "alpha"),
                            ("--rejection", dict(choices=["auto", "on", "off"]), "rejection")],
    "trimmed_height": [("--k-grid", dict(type=_int_list), "K_grid")],
    "brw_martingale": [("--l-grid", dict(type=_int_list), "L_grid"), ("--ratio-grid", dict(type=_int_list), "ratio_grid"),
                       ("--l", dict(type=int), "ks_L"), ("--eps", dict(type=float), "eps"),
                       ("--sign", dict(choices=list(brw.SIGNS)), "sign"), ("--ks-tol", dict(type=float), "ks_tol")],
    "cramer_check": [("--k", dict(type=int), "k"), ("--x", dict(type=float), "x"),
                     ("--n-grid", dict(type=_int_list), "n_grid"), ("--min-hits", dict(type=int), "min_hits")],
}

_THEORY = {
    "expected-size": ("n", "p"),
    "generation-size": ("n", "p", "k"),
    "size-pmf": ("m",),
    "second-moment": ("n", "p", "l_max"),
    "outdegree-ge": ("n", "k", "l_max"),
    "degree-limit": ("k",),
    "mixture-mgf": ("k", "lam"),
    "rate-function": ("k", "x"),
    "exp-cdf": ("x",),
}


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ttlab", description="Sample and study p-percolated uniform temporal trees.")
    ap.add_argument("--version", action="version", version=f"ttlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sample", help="sample one tree and write it as JSON")
    _add_tree(s)
    s.add_argument("--sampler", choices=["recursive", "spacings", "rejection", "trimmed"], default="recursive")
    s.add_argument("--k", type=int, default=None, help="K for the trimmed sampler")
    _add_budget(s)
    _add_seed(s)
    _add_out(s, ("json", "csv"))

    s = sub.add_parser("stats", help="statistics of a saved tree")
    s.add_argument("tree", type=Path)
    s.add_argument("--metric", choices=["size", "height", "profile", "degrees", "rootmass", "depth"], default="size")
    s.add_argument("--m", type=int, default=2, help="number of root children for rootmass (default 2)")
    _add_seed(s)
    _add_out(s, ("json", "csv"))

    s = sub.add_parser("theory", help="evaluate an exact formula or bound")
    s.add_argument("quantity", choices=sorted(_THEORY))
    s.add_argument("--n", type=int)
    s.add_argument("--p", type=float)
    s.add_argument("--k", type=int)
    s.add_argument("--m", type=int)
    s.add_argument("--x", type=float)
    s.add_argument("--lam", type=float)
    s.add_argument("--l-max", type=int, default=None)
    _add_out(s)

    s = sub.add_parser("brw", help="binary branching random walk")
    bsub = s.add_subparsers(dest="brw_command", required=True, parser_class=_Parser)
    g = bsub.add_parser("generation", help="values of generation L")
    g.add_argument("--l", type=int, required=True)
    g.add_argument("--eps", type=float, default=0.0)
    g.add_argument("--sign", choices=list(brw.SIGNS), default="none")
    _add_seed(g)
    _add_out(g, ("csv", "json"))
    g = bsub.add_parser("statistic", help="X_L per replica (csv) or its moments (json)")
    g.add_argument("--l", type=int, required=True)
    g.add_argument("--eps", type=float, default=0.0)
    g.add_argument("--sign", choices=list(brw.SIGNS), default="none")
    g.add_argument("--replicas", type=int, default=1000)
    g.add_argument("--workers", type=int, default=1)
    _add_seed(g)
    _add_out(g, ("json", "csv"))
    g = bsub.add_parser("moments", help="moments a_k of the limit")
    g.add_argument("--k", type=int, default=12)
    _add_out(g)

    s = sub.add_parser("experiment", help="run a named Monte Carlo experiment")
    esub = s.add_subparsers(dest="name", required=True, parser_class=_Parser)
    for name, flags in _EXPERIMENT_FLAGS.items():
        e = esub.add_parser(name, help=(harness.EXPERIMENTS[name].__doc__ or name).strip().split("\n")[0])
        if name in harness.NEEDS_PARAMS:
            _add_tree(e)
        e.add_argument("--replicas", type=int, required=True)
        e.add_argument("--workers", type=int, default=1)
        e.add_argument("--node-cap", type=int, default=None)
        e.add_argument("--dump-samples", type=Path, default=None, help="directory for one-column CSV sample dumps")
        for flag, kw, _ in flags:
            e.add_argument(flag, default=None, **kw)
        _add_seed(e)
        _add_out(e)

    s = sub.add_parser("validate", help="check every tree invariant of a saved tree")
    s.add_argument("tree", type=Path)
    return ap


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if getattr(args, "out", None) is not None:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)


def _echo(args) -> None:
    cfg = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())}
    sys.stderr.write("config " + json.dumps(cfg, sort_keys=True) + "\n")


def _seed(args) -> SeedSpec:
    return SeedSpec(args.seed, args.stream)


def _cmd_sample(args) -> int:
    P = TreeParams(args.n, args.p)
    budget = SampleBudget(args.node_cap, args.depth_cap)
    seed = _seed(args)
    if args.sampler == "trimmed":
        if args.k is None:
            raise UsageError("--k is required with --sampler trimmed")
        tree = sample_trimmed_tree(P, args.k, seed, budget)
    else:
        fn = {"recursive": sample_tree_recursive, "spacings": sample_tree_spacings, "rejection": sample_tree_rejection}
        tree = fn[args.sampler](P, seed, budget)
    if tree.truncation_bound:
        sys.stderr.write(f"truncation bound {jsonio.format_real(tree.truncation_bound)}\n")
    if args.format == "csv":
        lines = ["id,parent,depth,label"]
        lines += [
            f"{v},{'' if tree.parent[v] < 0 else int(tree.parent[v])},{int(tree.depth[v])},{jsonio.format_real(tree.label[v])}"
            for v in range(len(tree))
        ]
        _emit(args, "\n".join(lines))
    else:
        _emit(args, tree.to_json())
    return EXIT_OK


def _load_tree(path: Path) -> TemporalTree:
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    try:
        return TemporalTree.from_json(text)
    except (ValueError, KeyError, TypeError) as exc:
        raise InvalidTree(f"malformed tree document: {exc}") from None


def _cmd_stats(args) -> int:
    tree = _load_tree(args.tree)
    msg = find_violation(tree)
    if msg is not None:
        raise InvalidTree(msg)
    m = args.metric
    if m in ("profile", "degrees"):
        obj = stats.generation_profile(tree) if m == "profile" else stats.outdegree_histogram(tree)
        if args.format == "csv":
            _emit(args, obj.to_csv())
        else:
            _emit(args, jsonio.dumps({"metric": m, "counts": obj.counts}))
        return EXIT_OK
    if m == "rootmass":
        rm = stats.root_subtree_masses(tree, args.m)
        if args.format == "csv":
            _emit(args, "i,mass\n" + "\n".join(f"{i + 1},{jsonio.format_real(v)}" for i, v in enumerate(rm.masses)))
        else:
            _emit(args, jsonio.dumps({"metric": m, "masses": rm.masses, "sizes": rm.raw}))
        return EXIT_OK
    value = {
        "size": lambda: stats.size(tree),
        "height": lambda: stats.height(tree),
        "depth": lambda: stats.depth_of_uniform_vertex(tree, _seed(args)),
    }[m]()
    if args.format == "csv":
        _emit(args, f"metric,value\n{m},{value}")
    else:
        _emit(args, jsonio.dumps({"metric": m, "value": value}))
    return EXIT_OK


def _cmd_theory(args) -> int:
    q = args.quantity
    need = [a for a in _THEORY[q] if a != "l_max" and getattr(args, a) is None]
    if need:
        raise UsageError(f"theory {q} needs " + ", ".join("--" + a for a in need))
    tail = 0.0
    extra = {}
    if q == "expected-size":
        value = analytic.expected_size(args.n, args.p)
    elif q == "generation-size":
        value = analytic.expected_generation_size(args.n, args.p, args.k)
    elif q == "size-pmf":
        value = analytic.size_pmf_n1(args.m)
    elif q == "second-moment":
        sv = analytic.second_moment_upper_series(args.n, args.p, args.l_max)
        value, tail = sv.value, sv.tail_bound
        extra = {"terms_used": sv.terms_used, "five_times_squared_mean": 5.0 * math.exp(2.0 * args.n * args.p)}
    elif q == "outdegree-ge":
        sv = analytic.expected_outdegree_ge_series(args.n, args.k, args.l_max)
        value, tail = sv.value, sv.tail_bound
        extra = {"terms_used": sv.terms_used}
    elif q == "degree-limit":
        value = analytic.degree_limit(args.k)
    elif q == "mixture-mgf":
        value = analytic.mixture_mgf(args.k, args.lam)
    elif q == "rate-function":
        rf = analytic.rate_function(args.k, args.x)
        value = rf.value
        extra = {"maximizer": rf.maximizer, "upper_bound": rf.upper_bound, "phi_k": rf.phi_k}
    else:
        value = analytic.exp_cdf(args.x)
    doc = {"quantity": q, "value": value, "tail_bound": tail, **extra}
    _emit(args, jsonio.dumps(doc))
    return EXIT_OK


def _cmd_brw(args) -> int:
    c = args.brw_command
    if c == "generation":
        gen = brw.sample_generation(args.l, args.eps, args.sign, _seed(args))
        if args.format == "csv":
            _emit(args, "Q\n" + "\n".join(jsonio.format_real(v) for v in gen.values))
        else:
            _emit(args, jsonio.dumps({"L": gen.L, "eps": gen.eps, "sign": gen.sign, "values": gen.values}))
    elif c == "statistic":
        if args.replicas < 1 or args.workers < 1:
            raise UsageError("--replicas and --workers must be >= 1")
        brw.step_scale(args.eps, args.sign)
        out = harness.map_replicas(
            lambda s: brw.walk_summary(args.l, args.eps, args.sign, s), _seed(args), args.replicas, args.workers
        )
        x = np.array([o[0] for o in out])
        if args.format == "csv":
            _emit(args, "X\n" + "\n".join(jsonio.format_real(v) for v in x))
        else:
            d = harness.EmpiricalDistribution(x)
            doc = {
                "L": args.l,
                "eps": args.eps,
                "sign": args.sign,
                "replicas": args.replicas,
                "mean": d.mean,
                "se": d.standard_error,
                "second_moment": float(np.mean(x * x)),
                "mean_max_ratio": float(np.mean([o[1] for o in out])),
            }
            _emit(args, jsonio.dumps(doc))
    else:
        ms = brw.moment_sequence(args.k)
        _emit(args, jsonio.dumps({"k_max": args.k, "a": list(ms.a), "exact": [str(f) for f in ms.exact]}))
    return EXIT_OK


def _cmd_experiment(args) -> int:
    name = args.name
    params = TreeParams(args.n, args.p) if name in harness.NEEDS_PARAMS else None
    extra = {}
    for flag, _, key in _EXPERIMENT_FLAGS[name]:
        v = getattr(args, flag.lstrip("-").replace("-", "_"))
        if v is not None:
            extra[key] = v
    if args.node_cap is not None:
        extra["node_cap"] = args.node_cap
    if extra.get("rejection") in ("on", "off"):
        extra["rejection"] = extra["rejection"] == "on"
    cfg = harness.ExperimentConfig(name, args.replicas, _seed(args), params, extra, args.workers)
    result = harness.run(cfg)
    if args.dump_samples is not None:
        for path in result.dump_samples(args.dump_samples):
            sys.stderr.write(f"wrote {path}\n")
    _emit(args, result.to_json())
    return EXIT_OK


def _cmd_validate(args) -> int:
    tree = _load_tree(args.tree)
    msg = find_violation(tree)
    if msg is not None:
        sys.stderr.write(f"violation: {msg}\n")
        return EXIT_RUNTIME
    sys.stderr.write(f"ok: {len(tree)} nodes\n")
    return EXIT_OK


_COMMANDS = {
    "sample": _cmd_sample,
    "stats": _cmd_stats,
    "theory": _cmd_theory,
    "brw": _cmd_brw,
    "experiment": _cmd_experiment,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    _echo(args)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"ttlab: error: {exc}\n")
        return EXIT_USAGE
    except InvalidTree as exc:
        sys.stderr.write(f"violation: {exc}\n")
        return EXIT_RUNTIME
    except InvalidParams as exc:
        sys.stderr.write(f"ttlab: invalid parameters: {exc}\n")
        return EXIT_USAGE
    except TTLabError as exc:
        sys.stderr.write(f"ttlab: {type(exc).__name__}: {exc}\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
