"""Exact dynamic programs for Dyadic CART and ORT of order r.

Every rectangle of the lattice is a product of one interval per axis.  Each
axis gets an interval table (all intervals for the hierarchical family, only
the dyadic ones for the RDP family) and the DP arrays are indexed by a tuple
of interval ids, so all rectangles sharing the same side lengths (or the same
dyadic depths) are handled by one vectorised update.

For each rectangle R the solver stores

    OPT(R)   = min( SSE(R) + lam,  min_{splits} OPT(R1) + OPT(R2) )
    SPLIT(R) = the minimising split, or none

visiting rectangles so that both halves of every split are finished first.
Ties: a split replaces the current best only when it is lower by more than
``TIE_RTOL`` relative, so equal costs resolve to no split, then the smaller
axis, then the smaller cut.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .lattice import HIER, RDP, Partition, Rect, as_ndarray, dyadic_cut, hierarchical_split
from .polyfit import FitResult, PolyBasis, assemble_fit, lattice_basis, sse_from_stats

TIE_RTOL = 1e-12


class TableLookupError(LookupError):
    """A rectangle needed for reconstruction is missing from the DP tables."""


class _Axis:
    """Interval table for one axis of length ``n``."""

    def __init__(self, n: int, family: str):
        self.n = n
        self.family = family
        if family == HIER:
            # length-major: intervals of length h start at offset[h]
            self.offset = np.zeros(n + 2, dtype=np.int64)
            for h in range(1, n + 1):
                self.offset[h + 1] = self.offset[h] + n - h + 1
            lo = np.concatenate([np.arange(1, n - h + 2) for h in range(1, n + 1)])
            length = np.concatenate([np.full(n - h + 1, h) for h in range(1, n + 1)])
            self.lo, self.hi = lo, lo + length - 1
        elif family == RDP:
            lo, hi, depth, left, right = [1], [n], [0], [], []
            i = 0
            while i < len(lo):
                a, b = lo[i], hi[i]
                if b > a:
                    c = dyadic_cut(a, b)
                    left.append(len(lo))
                    right.append(len(lo) + 1)
                    lo += [a, c + 1]
                    hi += [c, b]
                    depth += [depth[i] + 1] * 2
                else:
                    left.append(-1)
                    right.append(-1)
                i += 1
            self.lo, self.hi = np.array(lo), np.array(hi)
            self.depth = np.array(depth)
            self.left, self.right = np.array(left), np.array(right)
            self.max_depth = int(self.depth.max())
            self.depth_start = np.searchsorted(self.depth, np.arange(self.max_depth + 2))
            self.lookup = {(int(a), int(b)): j for j, (a, b) in enumerate(zip(lo, hi))}
        else:
            raise ValueError(f"family must be 'rdp' or 'hier', got {family!r}")

    @property
    def size(self) -> int:
        return len(self.lo)

    def index(self, a: int, b: int) -> int:
        if self.family == HIER:
            if not 1 <= a <= b <= self.n:
                raise TableLookupError(f"interval [{a},{b}] outside [1,{self.n}]")
            return int(self.offset[b - a + 1] + a - 1)
        try:
            return self.lookup[(a, b)]
        except KeyError:
            raise TableLookupError(f"[{a},{b}] is not a dyadic interval of [1,{self.n}]") from None

    def aggregate(self, values: np.ndarray) -> np.ndarray:
        """Sum ``values`` (axis 0 of length n) over every interval of the table."""
        out = np.empty((self.size,) + values.shape[1:])
        if self.family == HIER:
            cur = values
            out[: self.n] = cur
            for h in range(2, self.n + 1):
                cur = cur[: self.n - h + 1] + values[h - 1:]
                out[self.offset[h]: self.offset[h + 1]] = cur
            return out
        leaf = self.left < 0
        out[leaf] = values[self.lo[leaf] - 1]
        for dep in range(self.max_depth - 1, -1, -1):
            ids = np.arange(self.depth_start[dep], self.depth_start[dep + 1])
            ids = ids[~leaf[ids]]
            out[ids] = out[self.left[ids]] + out[self.right[ids]]
        return out


def _cell_features(arr: np.ndarray, basis: PolyBasis) -> np.ndarray:
    B = lattice_basis(basis, arr.shape)
    L = basis.basis_dim
    gram = (B[..., :, None] * B[..., None, :]).reshape(arr.shape + (L * L,))
    return np.concatenate([(arr * arr)[..., None], gram, B * arr[..., None]], axis=-1)


def rectangle_sse(arr: np.ndarray, axes: list[_Axis], basis: PolyBasis) -> np.ndarray:
    """SSE of the best polynomial fit for every rectangle in the tables."""
    F = _cell_features(arr, basis)
    for k, ax in enumerate(axes):
        F = np.moveaxis(ax.aggregate(np.moveaxis(F, k, 0)), 0, k)
    L = basis.basis_dim
    gram = F[..., 1: 1 + L * L].reshape(F.shape[:-1] + (L, L))
    return sse_from_stats(F[..., 0], gram, F[..., 1 + L * L:], basis.degree)


@dataclass(eq=False)
class DPTables:
    family: str
    order: int
    lam: float
    dims: tuple[int, ...]
    axes: list
    opt: np.ndarray
    split_axis: np.ndarray
    split_cut: np.ndarray
    sse: np.ndarray

    def index(self, rect: Rect) -> tuple[int, ...]:
        if rect.d != len(self.dims):
            raise TableLookupError(f"{rect} has wrong dimension")
        return tuple(ax.index(a, b) for ax, a, b in zip(self.axes, rect.lo, rect.hi))

    def opt_of(self, rect: Rect) -> float:
        return float(self.opt[self.index(rect)])

    def split_of(self, rect: Rect):
        """``None`` or ``(axis, cut)`` with 1-based axis and the left piece ending at ``cut``."""
        idx = self.index(rect)
        k = int(self.split_axis[idx])
        if k < 0:
            return None
        a, b = rect.lo[k], rect.hi[k]
        if self.family == RDP:
            return k + 1, dyadic_cut(a, b)
        return k + 1, a + int(self.split_cut[idx]) - 1

    @property
    def root(self) -> Rect:
        return Rect.full(self.dims)


def _run_groups(groups, work, threads):
    if threads <= 1:
        for g in groups:
            for item in g:
                work(item)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for g in groups:
            # members of one group never depend on each other
            list(pool.map(work, g))


def _dp_hier(sse, axes, lam, threads):
    opt = np.empty_like(sse)
    split_axis = np.full(sse.shape, -1, dtype=np.int8)
    split_cut = np.zeros(sse.shape, dtype=np.int32)
    dims = [ax.n for ax in axes]
    d = len(dims)

    def block(k, h, shift, npos):
        start = int(axes[k].offset[h]) + shift
        return slice(start, start + npos)

    def work(shape):
        npos = [n - h + 1 for n, h in zip(dims, shape)]
        blk = tuple(block(k, shape[k], 0, npos[k]) for k in range(d))
        best = sse[blk] + lam
        bax = np.full(best.shape, -1, dtype=np.int8)
        bcut = np.zeros(best.shape, dtype=np.int32)
        for k in range(d):
            for t in range(1, shape[k]):
                left = blk[:k] + (block(k, t, 0, npos[k]),) + blk[k + 1:]
                right = blk[:k] + (block(k, shape[k] - t, t, npos[k]),) + blk[k + 1:]
                cand = opt[left] + opt[right]
                better = cand < best - TIE_RTOL * best
                best = np.where(better, cand, best)
                bax[better] = k
                bcut[better] = t
        opt[blk] = best
        split_axis[blk] = bax
        split_cut[blk] = bcut

    shapes = sorted(itertools.product(*[range(1, n + 1) for n in dims]),
                    key=lambda h: (sum(h), h))
    groups = [list(g) for _, g in itertools.groupby(shapes, key=sum)]
    _run_groups(groups, work, threads)
    return opt, split_axis, split_cut


def _dp_rdp(sse, axes, lam, threads):
    opt = np.empty_like(sse)
    split_axis = np.full(sse.shape, -1, dtype=np.int8)
    split_cut = np.zeros(sse.shape, dtype=np.int32)
    d = len(axes)

    def work(depths):
        blk = tuple(slice(int(ax.depth_start[l]), int(ax.depth_start[l + 1]))
                    for ax, l in zip(axes, depths))
        best = sse[blk] + lam
        bax = np.full(best.shape, -1, dtype=np.int8)
        for k, ax in enumerate(axes):
            ids = np.arange(blk[k].start, blk[k].stop)
            inner = ax.left[ids] >= 0
            if not inner.any():
                continue
            li = np.where(inner, ax.left[ids], 0)
            ri = np.where(inner, ax.right[ids], 0)
            cand = opt[blk[:k] + (li,) + blk[k + 1:]] + opt[blk[:k] + (ri,) + blk[k + 1:]]
            mask = inner.reshape((1,) * k + (-1,) + (1,) * (d - k - 1))
            better = mask & (cand < best - TIE_RTOL * best)
            best = np.where(better, cand, best)
            bax[better] = k
        opt[blk] = best
        split_axis[blk] = bax

    tuples = sorted(itertools.product(*[range(ax.max_depth + 1) for ax in axes]),
                    key=lambda t: (-sum(t), t))
    groups = [list(g) for _, g in itertools.groupby(tuples, key=sum)]
    _run_groups(groups, work, threads)
    return opt, split_axis, split_cut


def build_tables(y, order: int, lam: float, family: str, threads: int = 1) -> DPTables:
    """Fill OPT and SPLIT for every rectangle reachable in ``family``."""
    arr = as_ndarray(y)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if order < 0:
        raise ValueError("order must be >= 0")
    axes = [_Axis(n, family) for n in arr.shape]
    basis = PolyBasis(order, arr.ndim)
    sse = rectangle_sse(arr, axes, basis)
    dp = _dp_hier if family == HIER else _dp_rdp
    opt, split_axis, split_cut = dp(sse, axes, float(lam), threads)
    return DPTables(family, order, float(lam), arr.shape, axes, opt, split_axis, split_cut, sse)


def reconstruct(tables: DPTables, root: Rect | None = None) -> Partition:
    """Follow SPLIT top-down from ``root`` and collect the unsplit leaves."""
    root = tables.root if root is None else root
    leaves = []
    stack = [root]
    while stack:
        r = stack.pop()
        s = tables.split_of(r)
        if s is None:
            leaves.append(r)
        else:
            stack.extend(hierarchical_split(r, *s))
    return Partition(root, tuple(leaves), tables.family)


def solve(y, order: int, lam: float, family: str, threads: int = 1) -> FitResult:
    """Dyadic CART (``family='rdp'``) or ORT (``family='hier'``) of order ``order``."""
    arr = as_ndarray(y)
    tables = build_tables(arr, order, lam, family, threads)
    part = reconstruct(tables)
    return assemble_fit(arr, part, PolyBasis(order, arr.ndim), float(lam), order)


def opt_value(y, order: int, lam: float, family: str, threads: int = 1) -> float:
    tables = build_tables(y, order, lam, family, threads)
    return tables.opt_of(tables.root)
