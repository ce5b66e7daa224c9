"""Compiled breadth-first growth loops for the three tree samplers.

Each node's randomness comes only from its own 64-bit key (see ``rng``), so
the tree does not depend on the order in which nodes are expanded.  Nodes
are appended in BFS order, which makes every node's children contiguous.
"""

from __future__ import annotations

import math

import numba
import numpy as np

from .rng import nb_child_key, nb_uniform

MODE_RECURSIVE = 0
MODE_SPACINGS = 1
MODE_REJECTION = 2

OK = 0
OVER_BUDGET = 1

# Counter slot where the large-n binomial fallback starts drawing.
_FALLBACK_SLOT = 1 << 32


@numba.njit(cache=True, nogil=True)
def _binomial(n, q, key):
    """Binomial(n, q) by CDF inversion of one uniform (counter 0)."""
    if q <= 0.0:
        return 0
    if q >= 1.0:
        return n
    flip = q > 0.5
    s = 1.0 - q if flip else q
    pk = math.exp(n * math.log1p(-s))
    if pk == 0.0:
        # (1-s)^n underflows only for n in the thousands; count directly.
        c = 0
        for i in range(n):
            if nb_uniform(key, _FALLBACK_SLOT + i) < q:
                c += 1
        return c
    u = nb_uniform(key, 0)
    ratio = s / (1.0 - s)
    k = 0
    cdf = pk
    while u > cdf and k < n:
        pk *= ratio * (n - k) / (k + 1)
        k += 1
        cdf += pk
    return n - k if flip else k


@numba.njit(cache=True, nogil=True)
def _sort_desc(vals, slots, c):
    """Stable insertion sort, descending; equal labels keep draw order."""
    for i in range(1, c):
        v = vals[i]
        s = slots[i]
        j = i - 1
        while j >= 0 and vals[j] < v:
            vals[j + 1] = vals[j]
            slots[j + 1] = slots[j]
            j -= 1
        vals[j + 1] = v
        slots[j + 1] = s


@numba.njit(cache=True, nogil=True)
def _enforce_strict(vals, c, ceiling):
    # Floating-point ties (probability ~1e-16 per node) are broken one ulp down.
    prev = ceiling
    for i in range(c):
        if vals[i] >= prev:
            vals[i] = np.nextafter(prev, -1.0)
        prev = vals[i]


@numba.njit(cache=True, nogil=True)
def _grow(arr, cap):
    out = np.empty(cap, dtype=arr.dtype)
    out[: arr.shape[0]] = arr
    return out


@numba.njit(cache=True, nogil=True)
def grow_tree(mode, n, p, keep, root_key, node_cap, depth_cap):
    cap = 256
    label = np.empty(cap, dtype=np.float64)
    parent = np.empty(cap, dtype=np.int32)
    depth = np.empty(cap, dtype=np.int32)
    nchild = np.zeros(cap, dtype=np.int32)
    key = np.empty(cap, dtype=np.uint64)
    label[0] = p
    parent[0] = -1
    depth[0] = 0
    key[0] = root_key

    vals = np.empty(n + 1, dtype=np.float64)
    slots = np.empty(n + 1, dtype=np.int64)
    size = 1
    v = 0
    while v < size:
        ell = label[v]
        k = key[v]
        c = 0
        if mode == MODE_RECURSIVE:
            c = _binomial(n, ell, k)
            for j in range(c):
                vals[j] = nb_uniform(k, 1 + j) * ell
                slots[j] = j
            _sort_desc(vals, slots, c)
            for j in range(c):
                slots[j] = j  # children keyed by rank
        elif mode == MODE_SPACINGS:
            total = 0.0
            for j in range(n + 1):
                vals[j] = -math.log(nb_uniform(k, j))
                total += vals[j]
            run = 0.0
            for j in range(n):
                run += vals[j]
                cand = ell - run / total
                if cand < 0.0:
                    break
                vals[c] = cand
                slots[c] = c
                c += 1
        else:
            if depth_cap < 0 or depth[v] < depth_cap:
                for j in range(n):
                    u = nb_uniform(k, j)
                    if u < ell:
                        vals[c] = u
                        slots[c] = j  # children keyed by edge address
                        c += 1
                _sort_desc(vals, slots, c)
        if c > keep:
            c = keep
        if c == 0:
            v += 1
            continue
        _enforce_strict(vals, c, ell)
        if size + c > node_cap:
            return OVER_BUDGET, label[:size].copy(), parent[:size].copy(), depth[:size].copy(), nchild[:size].copy()
        if size + c > cap:
            while size + c > cap:
                cap *= 2
            label = _grow(label, cap)
            parent = _grow(parent, cap)
            depth = _grow(depth, cap)
            key = _grow(key, cap)
            nc = np.zeros(cap, dtype=np.int32)
            nc[:size] = nchild[:size]
            nchild = nc
        d = depth[v] + 1
        for j in range(c):
            label[size] = vals[j]
            parent[size] = v
            depth[size] = d
            key[size] = nb_child_key(k, slots[j])
            size += 1
        nchild[v] = c
        v += 1
    return OK, label[:size].copy(), parent[:size].copy(), depth[:size].copy(), nchild[:size].copy()


@numba.njit(cache=True, nogil=True)
def tree_sizes(mode, n, p, keep, root_keys, node_cap, depth_cap):
    """Size and height of one tree per root key; status -1 marks an over-budget replica."""
    m = root_keys.shape[0]
    size = np.empty(m, dtype=np.int64)
    height = np.empty(m, dtype=np.int64)
    for i in range(m):
        status, label, parent, depth, nchild = grow_tree(mode, n, p, keep, root_keys[i], node_cap, depth_cap)
        if status == OVER_BUDGET:
            size[i] = -1
            height[i] = -1
        else:
            size[i] = label.shape[0]
            height[i] = depth.max()
    return size, height
