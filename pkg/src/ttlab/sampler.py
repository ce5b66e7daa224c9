"""Sampling p-percolated uniform temporal trees.

Three independent constructions of the same law:

* :func:`sample_tree_recursive` -- a node with label ``l`` gets
  Binomial(n, l) children with iid Uniform(0, l) labels.
* :func:`sample_tree_spacings` -- children labels are the parent label minus
  partial sums of uniform spacings built from n+1 exponentials.
* :func:`sample_tree_rejection` -- labels of the complete n-ary tree are a
  pure function of each edge's address; vertices whose root path is not
  strictly decreasing (or exceeds ``p``) are deleted, down to ``depth_cap``.

Trees are stored as flat arrays (an arena) in breadth-first order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import _kernels, jsonio
from .errors import BudgetExceeded, DepthCapMissing, InvalidParams, InvalidTree
from .rng import TAG_TREE, SeedSpec, child_key_pairs, draw64_pairs, replica_keys_array, to_uniform_array

DEFAULT_NODE_CAP = 2**27


@dataclass(frozen=True)
class TreeParams:
    n: int
    p: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InvalidParams(f"n must be a positive integer, got {self.n!r}")
        if not (0.0 <= float(self.p) <= 1.0):
            raise InvalidParams(f"p must lie in [0, 1], got {self.p!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "p", float(self.p))

    @property
    def np(self) -> float:
        return self.n * self.p


@dataclass(frozen=True)
class SampleBudget:
    node_cap: int = DEFAULT_NODE_CAP
    depth_cap: int | None = None

    def __post_init__(self):
        if self.node_cap < 1:
            raise InvalidParams("node_cap must be >= 1")
        if self.depth_cap is not None and self.depth_cap < 0:
            raise InvalidParams("depth_cap must be >= 0")


class Node(NamedTuple):
    id: int
    label: float
    parent: int | None
    depth: int
    children: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class TemporalTree:
    """A rooted labelled tree in flat-array form.

    Node 0 is the root.  Children of node ``v`` are
    ``child_idx[child_ptr[v]:child_ptr[v + 1]]``, listed by decreasing label,
    so a child's position (1-based) is its rank among its siblings.
    ``depth`` is -1 for nodes unreachable from the root (only possible for
    trees read from disk, and reported by :func:`find_violation`).
    """

    params: TreeParams
    label: np.ndarray
    parent: np.ndarray
    depth: np.ndarray
    child_ptr: np.ndarray
    child_idx: np.ndarray
    truncation_bound: float = 0.0
    _bfs: bool = field(default=False, repr=False)

    def __post_init__(self):
        for name in ("label", "parent", "depth", "child_ptr", "child_idx"):
            getattr(self, name).flags.writeable = False

    def __len__(self) -> int:
        return int(self.label.shape[0])

    @property
    def size(self) -> int:
        return len(self)

    def children(self, v: int) -> np.ndarray:
        return self.child_idx[self.child_ptr[v] : self.child_ptr[v + 1]]

    @property
    def outdegree(self) -> np.ndarray:
        return np.diff(self.child_ptr)

    def node(self, v: int) -> Node:
        par = int(self.parent[v])
        return Node(
            int(v),
            float(self.label[v]),
            None if par < 0 else par,
            int(self.depth[v]),
            tuple(int(c) for c in self.children(v)),
        )

    def nodes(self):
        for v in range(len(self)):
            yield self.node(v)

    @cached_property
    def levels(self) -> list[np.ndarray]:
        """Node ids grouped by depth, shallowest first."""
        reach = self.depth >= 0
        if not reach.any():
            return []
        if self._bfs:
            bounds = np.searchsorted(self.depth, np.arange(int(self.depth.max()) + 2))
            return [np.arange(bounds[d], bounds[d + 1]) for d in range(len(bounds) - 1)]
        ids = np.flatnonzero(reach)
        order = ids[np.argsort(self.depth[ids], kind="stable")]
        d = self.depth[order]
        bounds = np.searchsorted(d, np.arange(int(d.max()) + 2))
        return [order[bounds[k] : bounds[k + 1]] for k in range(len(bounds) - 1)]

    # -- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        nodes = []
        for v in range(len(self)):
            par = int(self.parent[v])
            nodes.append(
                {
                    "id": v,
                    "parent": None if par < 0 else par,
                    "label": float(self.label[v]),
                    "children": self.children(v).tolist(),
                }
            )
        return {"n": self.params.n, "p": self.params.p, "nodes": nodes}

    def to_json(self) -> str:
        # One node per line keeps large trees diff-able.
        head = '{"n": %d, "p": %s, "nodes": [' % (self.params.n, jsonio.format_real(self.params.p))
        lines = []
        cp, ci, lab, par = self.child_ptr, self.child_idx, self.label, self.parent
        for v in range(len(self)):
            pv = int(par[v])
            kids = ",".join(str(int(c)) for c in ci[cp[v] : cp[v + 1]])
            lines.append(
                '{"id": %d, "parent": %s, "label": %s, "children": [%s]}'
                % (v, "null" if pv < 0 else str(pv), jsonio.format_real(lab[v]), kids)
            )
        return head + "\n" + ",\n".join(lines) + "\n]}\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def from_dict(cls, doc: dict) -> "TemporalTree":
        """Build a tree from its JSON document without validating it."""
        try:
            params = TreeParams(int(doc["n"]), float(doc["p"]))
            raw = list(doc["nodes"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidTree(f"malformed tree document: {exc}") from None
        size = len(raw)
        by_id: dict[int, dict] = {}
        for rec in raw:
            try:
                i = int(rec["id"])
            except (KeyError, TypeError, ValueError):
                raise InvalidTree("node without an integer id") from None
            if i in by_id or not 0 <= i < size:
                raise InvalidTree(f"node ids must be a permutation of 0..{size - 1}; bad id {i}")
            by_id[i] = rec
        label = np.empty(size)
        parent = np.full(size, -1, dtype=np.int32)
        ptr = [0]
        kids: list[int] = []
        try:
            for i in range(size):
                rec = by_id[i]
                label[i] = float(rec["label"])
                parent[i] = -1 if rec.get("parent") is None else int(rec["parent"])
                kids.extend(int(c) for c in rec.get("children", []))
                ptr.append(len(kids))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidTree(f"malformed node record: {exc}") from None
        child_ptr = np.asarray(ptr, dtype=np.int64)
        child_idx = np.asarray(kids, dtype=np.int32)
        depth = _depths_from_children(size, child_ptr, child_idx)
        return cls(params, label, parent, depth, child_ptr, child_idx)

    @classmethod
    def from_json(cls, text: str) -> "TemporalTree":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidTree(f"not valid JSON: {exc}") from None
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path: str | Path) -> "TemporalTree":
        return cls.from_json(Path(path).read_text())


def _depths_from_children(size, child_ptr, child_idx) -> np.ndarray:
    depth = np.full(size, -1, dtype=np.int32)
    if size == 0:
        return depth
    depth[0] = 0
    frontier = [0]
    while frontier:
        nxt = []
        for v in frontier:
            for c in child_idx[child_ptr[v] : child_ptr[v + 1]]:
                c = int(c)
                if 0 <= c < size and depth[c] < 0:
                    depth[c] = depth[v] + 1
                    nxt.append(c)
        frontier = nxt
    return depth


def _from_kernel(params, label, parent, depth, nchild, truncation_bound=0.0) -> TemporalTree:
    # BFS order: the children of v are nodes ptr[v]+1 .. ptr[v+1].
    size = label.shape[0]
    child_ptr = np.zeros(size + 1, dtype=np.int64)
    np.cumsum(nchild, out=child_ptr[1:])
    return TemporalTree(
        params,
        label,
        parent,
        depth,
        child_ptr,
        np.arange(1, size, dtype=np.int32),
        truncation_bound,
        _bfs=True,
    )


def root_key(seed: SeedSpec) -> int:
    return seed.key_for(TAG_TREE)


def _run(mode, params, keep, seed, budget, depth_cap=-1):
    if not isinstance(seed, SeedSpec):
        raise InvalidParams("seed must be a SeedSpec")
    status, label, parent, depth, nchild = _kernels.grow_tree(
        mode,
        params.n,
        params.p,
        keep,
        np.uint64(root_key(seed)),
        budget.node_cap,
        depth_cap,
    )
    if status == _kernels.OVER_BUDGET:
        raise BudgetExceeded(
            f"tree exceeded node_cap={budget.node_cap} (expected size e^(np) = {math.exp(params.np):.4g})"
        )
    return label, parent, depth, nchild


def sample_tree_recursive(
    params: TreeParams, seed: SeedSpec, budget: SampleBudget = SampleBudget()
) -> TemporalTree:
    out = _run(_kernels.MODE_RECURSIVE, params, params.n, seed, budget)
    return _from_kernel(params, *out)


def sample_trimmed_tree(
    params: TreeParams, K: int, seed: SeedSpec, budget: SampleBudget = SampleBudget()
) -> TemporalTree:
    """The recursive sampler with each node keeping only its K highest-labelled children.

    Children are keyed by rank, so for a shared seed the result is the
    subtree of ``sample_tree_recursive`` obtained by the trimming; ``K = n``
    reproduces it exactly.
    """
    if not 1 <= K <= params.n:
        raise InvalidParams(f"need 1 <= K <= n, got K={K}, n={params.n}")
    out = _run(_kernels.MODE_RECURSIVE, params, int(K), seed, budget)
    return _from_kernel(params, *out)


def sample_tree_spacings(
    params: TreeParams, seed: SeedSpec, budget: SampleBudget = SampleBudget()
) -> TemporalTree:
    """Uniform spacings coupling anchored at each parent's label.

    For a node with label l, draw E_1..E_{n+1} ~ Exp(1); the j-th candidate
    child has label l - (E_1 + ... + E_j) / (E_1 + ... + E_{n+1}) and is kept
    iff that is nonnegative.
    """
    out = _run(_kernels.MODE_SPACINGS, params, params.n, seed, budget)
    return _from_kernel(params, *out)


def sample_sizes(
    params: TreeParams,
    seed: SeedSpec,
    replicas: int,
    sampler: str = "recursive",
    budget: SampleBudget = SampleBudget(),
) -> tuple[np.ndarray, np.ndarray]:
    """Sizes and heights of the trees of replicas ``seed.replica(0..replicas-1)``.

    Same trees as calling the per-tree sampler on each replica seed, without
    building ``TemporalTree`` objects; meant for many small trees.
    """
    modes = {"recursive": _kernels.MODE_RECURSIVE, "spacings": _kernels.MODE_SPACINGS}
    if sampler not in modes:
        raise InvalidParams(f"sampler must be one of {sorted(modes)}, got {sampler!r}")
    if replicas < 0:
        raise InvalidParams("replicas must be >= 0")
    keys = replica_keys_array(seed, int(replicas), TAG_TREE)
    size, height = _kernels.tree_sizes(modes[sampler], params.n, params.p, params.n, keys, budget.node_cap, -1)
    if replicas and size.min() < 0:
        raise BudgetExceeded(f"a tree exceeded node_cap={budget.node_cap}")
    return size, height


def truncation_bound(np_: float, depth_cap: int) -> float:
    """Upper bound sum_{k > depth_cap} (np)^k / k! on P(a vertex survives below the cap)."""
    from .analytic import poisson_tail_sum

    return poisson_tail_sum(np_, depth_cap)


def sample_tree_rejection(
    params: TreeParams,
    seed: SeedSpec,
    budget: SampleBudget,
    exhaustive: bool = False,
) -> TemporalTree:
    """Prune the labelled complete n-ary tree down to its decreasing paths.

    The label of edge ``j`` below a vertex is a pure function of the
    vertex's address, so evaluating only edges below surviving vertices gives
    the same tree as materializing all ``n^depth_cap`` vertices first;
    ``exhaustive=True`` does the latter literally (small cases only).
    The returned tree carries ``truncation_bound``.
    """
    if budget.depth_cap is None:
        raise DepthCapMissing("sample_tree_rejection needs budget.depth_cap")
    bound = truncation_bound(params.np, budget.depth_cap)
    if exhaustive:
        return _rejection_exhaustive(params, seed, budget, bound)
    out = _run(_kernels.MODE_REJECTION, params, params.n, seed, budget, budget.depth_cap)
    return _from_kernel(params, *out, truncation_bound=bound)


def _rejection_exhaustive(params, seed, budget, bound) -> TemporalTree:
    n, cap = params.n, budget.depth_cap
    total = sum(n**d for d in range(cap + 1))
    if total > budget.node_cap:
        raise BudgetExceeded(f"complete {n}-ary tree to depth {cap} has {total} vertices > node_cap")
    # Level d of the complete tree: keys, labels, alive mask, parent position.
    keys = np.array([root_key(seed)], dtype=np.uint64)
    lab = np.array([params.p])
    alive = np.array([True])
    levels = [(lab, alive, np.array([-1]))]
    for _ in range(cap):
        m = keys.shape[0]
        edge = np.tile(np.arange(n, dtype=np.uint64), m)
        pk = np.repeat(keys, n)
        u = to_uniform_array(draw64_pairs(pk, edge))
        par_pos = np.repeat(np.arange(m), n)
        alive = np.repeat(alive, n) & (u < np.repeat(lab, n))
        keys, lab = child_key_pairs(pk, edge), u
        levels.append((lab, alive, par_pos))
    # Survivors, renumbered so siblings are contiguous and sorted like the kernel's.
    label, parent, depth = [params.p], [-1], [0]
    prev_ids = np.array([0])
    for d in range(1, cap + 1):
        lab, alive, par_pos = levels[d]
        ids = np.full(lab.shape[0], -1)
        idx = np.flatnonzero(alive)
        order = idx[np.lexsort((-lab[idx], prev_ids[par_pos[idx]]))]
        for j in order:
            ids[j] = len(label)
            label.append(lab[j])
            parent.append(int(prev_ids[par_pos[j]]))
            depth.append(d)
        prev_ids = ids
    label = np.asarray(label)
    parent = np.asarray(parent, dtype=np.int32)
    depth = np.asarray(depth, dtype=np.int32)
    nchild = np.bincount(parent[1:], minlength=label.shape[0]).astype(np.int32)
    return _from_kernel(params, label, parent, depth, nchild, truncation_bound=bound)


SAMPLERS = {
    "recursive": sample_tree_recursive,
    "spacings": sample_tree_spacings,
    "rejection": sample_tree_rejection,
}


def find_violation(tree: TemporalTree) -> str | None:
    """Return a description of the first broken tree invariant, or None."""
    size = len(tree)
    if size == 0:
        return "missing root"
    n, p = tree.params.n, tree.params.p
    lab, par, dep = tree.label, tree.parent, tree.depth
    if par[0] != -1:
        return "root has a parent"
    if lab[0] != p:
        return f"root label {lab[0]!r} differs from p={p!r}"
    if dep[0] != 0:
        return "root depth is not 0"
    deg = np.diff(tree.child_ptr)
    if deg.size != size or tree.child_ptr[0] < 0 or tree.child_ptr[-1] != tree.child_idx.size:
        return "malformed child lists"
    if np.any(deg < 0):
        return "malformed child lists"
    if np.any(deg > n):
        v = int(np.flatnonzero(deg > n)[0])
        return f"node {v} has {int(deg[v])} > n={n} children"
    ci = tree.child_idx
    if ci.size != size - 1:
        return f"{ci.size} child entries for {size} nodes"
    if ci.size and (ci.min() < 1 or ci.max() >= size):
        return "child id out of range"
    if ci.size and np.unique(ci).size != ci.size:
        return "node listed as a child twice"
    owner = np.repeat(np.arange(size), deg)
    bad = np.flatnonzero(par[ci] != owner)
    if bad.size:
        c = int(ci[bad[0]])
        return f"node {c} has parent {int(par[c])} but is listed under {int(owner[bad[0]])}"
    if np.any(dep < 0):
        return f"node {int(np.flatnonzero(dep < 0)[0])} unreachable from root"
    nonroot = np.arange(1, size)
    bad = nonroot[~(lab[nonroot] < lab[par[nonroot]])]
    if bad.size:
        v = int(bad[0])
        return f"non-decreasing edge: node {v} label {lab[v]!r} >= parent {int(par[v])} label {lab[par[v]]!r}"
    outside = ~((lab >= 0.0) & (lab <= p))
    if outside.any():
        v = int(np.flatnonzero(outside)[0])
        return f"node {v} label {lab[v]!r} outside [0, p]"
    bad = nonroot[dep[nonroot] != dep[par[nonroot]] + 1]
    if bad.size:
        return f"node {int(bad[0])} depth inconsistent with parent"
    # Sibling order: consecutive entries in the same child list strictly decrease.
    if ci.size > 1:
        same = owner[1:] == owner[:-1]
        viol = same & (lab[ci[1:]] >= lab[ci[:-1]])
        if viol.any():
            j = int(np.flatnonzero(viol)[0])
            return f"children of node {int(owner[j])} not in strictly decreasing label order"
    return None


def validate(tree: TemporalTree) -> None:
    msg = find_violation(tree)
    if msg is not None:
        raise InvalidTree(msg)
