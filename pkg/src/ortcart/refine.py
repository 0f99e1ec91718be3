"""Constructive refinements of partitions into RDPs and hierarchical partitions."""
from __future__ import annotations

import itertools
from math import ceil, log2

import numpy as np

from .lattice import HIER, RDP, Partition, Rect, as_ndarray, dyadic_cut


def dyadic_decompose_interval(interval, n: int) -> list[tuple[int, int]]:
    """Split ``[a, b]`` into maximal dyadic intervals of ``[1, n]``.

    Walks the dyadic split tree of ``[1, n]`` and keeps every node that lies
    inside ``[a, b]`` while its parent does not.  At most two nodes survive
    per tree level, hence at most ``2 * ceil(log2 n) + 1`` pieces.
    """
    a, b = interval
    if not 1 <= a <= b <= n:
        raise ValueError(f"[{a},{b}] is not a subinterval of [1,{n}]")
    out = []
    stack = [(1, n)]
    while stack:
        lo, hi = stack.pop()
        if hi < a or lo > b:
            continue
        if a <= lo and hi <= b:
            out.append((lo, hi))
            continue
        c = dyadic_cut(lo, hi)
        stack.append((c + 1, hi))
        stack.append((lo, c))
    return sorted(out)


def decompose_bound(n: int) -> int:
    return 2 * ceil(log2(n)) + 1 if n > 1 else 1


def refine_1d_to_rdp(p: Partition, warmup: bool = False) -> Partition:
    """Coarsest RDP of ``[1, n]`` refining the 1-D partition ``p``.

    A dyadic node is split only when it is not contained in a piece of ``p``.
    With ``warmup=True`` the complete dyadic tree is first grown until it has
    more than ``k = |p|`` leaves, which is the version used in the counting
    argument; it never has fewer pieces than the coarsest refinement.
    """
    if p.root.d != 1:
        raise ValueError("refine_1d_to_rdp needs a 1-D partition")
    a0, n = p.root.lo[0], p.root.hi[0]
    pieces = [(r.lo[0], r.hi[0]) for r in p.rects]
    starts = np.array([lo for lo, _ in pieces])
    ends = np.array([hi for _, hi in pieces])

    def inside_piece(lo, hi):
        j = np.searchsorted(starts, lo, side="right") - 1
        return ends[j] >= hi

    nodes = [(a0, n)]
    if warmup:
        k = len(pieces)
        while len(nodes) <= k and any(hi > lo for lo, hi in nodes):
            grown = []
            for lo, hi in nodes:
                if hi > lo:
                    c = dyadic_cut(lo, hi)
                    grown += [(lo, c), (c + 1, hi)]
                else:
                    grown.append((lo, hi))
            nodes = grown
    leaves = []
    stack = list(nodes)
    while stack:
        lo, hi = stack.pop()
        if inside_piece(lo, hi):
            leaves.append((lo, hi))
        else:
            c = dyadic_cut(lo, hi)
            stack += [(lo, c), (c + 1, hi)]
    return Partition(p.root, tuple(Rect((lo,), (hi,)) for lo, hi in leaves), RDP)


def refine_1d_bound(n: int, k: int) -> float:
    return 4 * k * (1 + log2(2 * n / k))


def refine_2d_to_rdp(p: Partition) -> Partition:
    """Refine a 2-D partition into products of dyadic intervals (an RDP in 2-D)."""
    if p.root.d != 2:
        raise ValueError("refine_2d_to_rdp needs a 2-D partition")
    if p.root.lo != (1, 1):
        raise ValueError("root must start at (1, 1)")
    n1, n2 = p.root.hi
    out = []
    for r in p.rects:
        rows = dyadic_decompose_interval((r.lo[0], r.hi[0]), n1)
        cols = dyadic_decompose_interval((r.lo[1], r.hi[1]), n2)
        out += [Rect((i0, j0), (i1, j1)) for (i0, i1), (j0, j1) in itertools.product(rows, cols)]
    return Partition(p.root, tuple(out), RDP)


def refine_2d_bound(n: int, k: int) -> int:
    return k * decompose_bound(n) ** 2


def sparse_to_hierarchical(theta) -> Partition:
    """Hierarchical partition on which ``theta`` is piecewise constant.

    Slices along the first axis at the support coordinates: gaps between
    support slices become single slabs (value zero) and each support slice
    is handled recursively in one dimension fewer.  The piece count is at
    most ``3 d ||theta||_0`` (one piece for the zero array).
    """
    arr = as_ndarray(theta)
    root = Rect.full(arr.shape)
    rects: list[Rect] = []
    _slice_support(arr, (), root, rects)
    return Partition(root, tuple(rects), HIER)


def _slice_support(arr, fixed, region: Rect, out):
    # ``fixed`` holds the already-sliced leading coordinates.
    k = len(fixed)
    n = region.hi[k]
    sub = arr[tuple(i - 1 for i in fixed)]
    if sub.ndim == 1:
        support = np.flatnonzero(sub)
    else:
        support = np.flatnonzero(np.any(sub != 0, axis=tuple(range(1, sub.ndim))))
    support = [int(i) + 1 for i in support]

    def slab(lo, hi):
        return Rect(fixed + (lo,) + region.lo[k + 1:], fixed + (hi,) + region.hi[k + 1:])

    prev = 0
    for i in support:
        if i > prev + 1:
            out.append(slab(prev + 1, i - 1))
        if k == region.d - 1:
            out.append(slab(i, i))
        else:
            _slice_support(arr, fixed + (i,), region, out)
        prev = i
    if prev < n:
        out.append(slab(prev + 1, n))
