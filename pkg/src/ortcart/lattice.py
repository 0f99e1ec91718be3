"""Lattice arrays, rectangles, splits and partitions.

Indices are 1-based and inclusive, matching the usual way these partitions
are written down: a rectangle is a product of integer intervals
``[lo_i, hi_i]`` inside ``[1, n_1] x ... x [1, n_d]``.  Flat storage of a
:class:`LatticeArray` is row-major with the last axis varying fastest.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

RDP = "rdp"
HIER = "hier"
ARBITRARY = "arbitrary"
FAMILIES = (RDP, HIER, ARBITRARY)


class LatticeError(ValueError):
    pass


class UnsplittableAxis(LatticeError):
    pass


class InvalidCut(LatticeError):
    pass


class NotAPartition(LatticeError):
    pass


@dataclass(frozen=True, eq=False)
class LatticeArray:
    """Real array on the lattice ``[n_1] x ... x [n_d]``."""

    dims: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        if len(dims) < 1 or any(n < 1 for n in dims):
            raise LatticeError(f"invalid lattice dims {dims}")
        vals = np.array(self.values, dtype=float)
        if vals.size != int(np.prod(dims)):
            raise LatticeError(
                f"got {vals.size} values for dims {dims} (need {int(np.prod(dims))})")
        vals = vals.reshape(dims)
        vals.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_flat(cls, dims: Sequence[int], flat: Iterable[float]) -> "LatticeArray":
        return cls(tuple(dims), np.asarray(list(flat), dtype=float))

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def __getitem__(self, index):
        return self.values[index]

    def __eq__(self, other):
        if not isinstance(other, LatticeArray):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"LatticeArray(dims={self.dims})"


def as_ndarray(y) -> np.ndarray:
    """Return the values of ``y`` (LatticeArray or array-like) as a float ndarray."""
    if isinstance(y, LatticeArray):
        return y.values
    arr = np.asarray(y, dtype=float)
    if arr.ndim == 0:
        raise LatticeError("a lattice array needs at least one axis")
    return arr


@dataclass(frozen=True, order=True)
class Rect:
    """Axis-aligned rectangle ``prod [lo_i, hi_i]`` (1-based, inclusive)."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        lo = tuple(int(a) for a in self.lo)
        hi = tuple(int(b) for b in self.hi)
        if len(lo) != len(hi) or not lo:
            raise LatticeError(f"lo/hi length mismatch: {lo} {hi}")
        if any(a < 1 or a > b for a, b in zip(lo, hi)):
            raise LatticeError(f"empty or out-of-range rectangle {lo}..{hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def full(cls, dims: Sequence[int]) -> "Rect":
        return cls((1,) * len(dims), tuple(dims))

    @property
    def d(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(b - a + 1 for a, b in zip(self.lo, self.hi))

    @property
    def size(self) -> int:
        return reduce(lambda x, y: x * y, self.shape, 1)

    @property
    def side_sum(self) -> int:
        """Sum of side lengths (the ordering key used by the DP)."""
        return sum(self.shape)

    @property
    def aspect_ratio(self) -> float:
        s = self.shape
        return max(s) / min(s)

    @property
    def slices(self) -> tuple[slice, ...]:
        return tuple(slice(a - 1, b) for a, b in zip(self.lo, self.hi))

    def within(self, dims: Sequence[int]) -> bool:
        return len(dims) == self.d and all(b <= n for b, n in zip(self.hi, dims))

    def contains(self, other: "Rect") -> bool:
        return all(a <= c and d <= b for a, b, c, d in
                   zip(self.lo, self.hi, other.lo, other.hi))

    def intersects(self, other: "Rect") -> bool:
        return all(a <= d and c <= b for a, b, c, d in
                   zip(self.lo, self.hi, other.lo, other.hi))

    def cells(self) -> np.ndarray:
        """All cells of the rectangle as an (size, d) array of 1-based indices."""
        grids = np.meshgrid(*[np.arange(a, b + 1) for a, b in zip(self.lo, self.hi)],
                            indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def __str__(self):
        return "x".join(f"[{a},{b}]" for a, b in zip(self.lo, self.hi))


def _check_axis(r: Rect, axis: int) -> int:
    if not 1 <= axis <= r.d:
        raise LatticeError(f"axis {axis} outside [1, {r.d}]")
    return axis - 1


def _cut(r: Rect, k: int, cut: int) -> tuple[Rect, Rect]:
    hi1 = list(r.hi)
    lo2 = list(r.lo)
    hi1[k] = cut
    lo2[k] = cut + 1
    return Rect(r.lo, tuple(hi1)), Rect(tuple(lo2), r.hi)


def dyadic_cut(a: int, b: int) -> int:
    """Last index of the left half of ``[a, b]``: ``a - 1 + ceil((b - a + 1) / 2)``."""
    return a - 1 + (b - a + 2) // 2


def dyadic_split(r: Rect, axis: int) -> tuple[Rect, Rect]:
    k = _check_axis(r, axis)
    a, b = r.lo[k], r.hi[k]
    if b == a:
        raise UnsplittableAxis(f"unsplittable axis {axis} of {r}: side length 1")
    return _cut(r, k, dyadic_cut(a, b))


def hierarchical_split(r: Rect, axis: int, cut: int) -> tuple[Rect, Rect]:
    """Split ``r`` into ``[a, cut]`` and ``[cut + 1, b]`` along ``axis``."""
    k = _check_axis(r, axis)
    a, b = r.lo[k], r.hi[k]
    if not a <= cut < b:
        raise InvalidCut(f"invalid cut {cut} on axis {axis} of {r}: need {a} <= cut < {b}")
    return _cut(r, k, cut)


@dataclass(frozen=True)
class Partition:
    """Disjoint cover of ``root`` by rectangles.

    Rectangles are stored in canonical (lexicographic) order, so two
    partitions compare equal iff they hold the same rectangles; the family
    tag does not take part in comparisons.
    """

    root: Rect
    rects: tuple[Rect, ...]
    family: str = field(default=ARBITRARY, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise LatticeError(f"unknown partition family {self.family!r}")
        rects = tuple(sorted(self.rects))
        object.__setattr__(self, "rects", rects)
        check_cover(self.root, rects)

    def __len__(self):
        return len(self.rects)

    def __iter__(self):
        return iter(self.rects)

    def check_family(self) -> bool:
        if self.family == RDP:
            return is_rdp(self)
        if self.family == HIER:
            return is_hierarchical(self)
        return True

    def refines(self, coarse: "Partition") -> bool:
        """True iff every rectangle lies inside some rectangle of ``coarse``."""
        return all(any(c.contains(r) for c in coarse.rects) for r in self.rects)

    def label_array(self) -> np.ndarray:
        """Integer array over the root (0-based offsets) giving each cell's piece."""
        out = np.empty(self.root.shape, dtype=np.int64)
        off = tuple(a - 1 for a in self.root.lo)
        for i, r in enumerate(self.rects):
            out[tuple(slice(s.start - o, s.stop - o) for s, o in zip(r.slices, off))] = i
        return out


def check_cover(root: Rect, rects: Sequence[Rect]) -> None:
    """Raise :class:`NotAPartition` unless ``rects`` is a disjoint cover of ``root``."""
    if not rects:
        raise NotAPartition("no rectangles")
    count = np.zeros(root.shape, dtype=np.int32)
    off = tuple(a - 1 for a in root.lo)
    for r in rects:
        if r.d != root.d or not root.contains(r):
            raise NotAPartition(f"{r} is not inside root {root}")
        count[tuple(slice(s.start - o, s.stop - o) for s, o in zip(r.slices, off))] += 1
    if sum(r.size for r in rects) != root.size or not np.all(count == 1):
        raise NotAPartition("rectangles overlap or leave cells uncovered")


def _guillotine(region: Rect, rects, dyadic: bool) -> bool:
    # Any admissible guillotine cut keeps both sides in the family, so the
    # first one found is as good as any other.
    lo = np.array([r.lo for r in rects])
    hi = np.array([r.hi for r in rects])
    stack = [(np.array(region.lo), np.array(region.hi), np.arange(len(rects)))]
    while stack:
        a, b, idx = stack.pop()
        if idx.size == 1:
            continue
        found = None
        for k in range(len(a)):
            if a[k] == b[k]:
                continue
            rlo, rhi = lo[idx, k], hi[idx, k]
            if dyadic:
                cuts = np.array([dyadic_cut(int(a[k]), int(b[k]))])
            else:
                cuts = np.unique(rhi[rhi < b[k]])
            crossed = ((rlo[None, :] <= cuts[:, None]) & (cuts[:, None] < rhi[None, :])).any(1)
            ok = np.flatnonzero(~crossed)
            if ok.size:
                found = (k, int(cuts[ok[0]]))
                break
        if found is None:
            return False
        k, c = found
        left = hi[idx, k] <= c
        b_left, a_right = b.copy(), a.copy()
        b_left[k], a_right[k] = c, c + 1
        stack.append((a, b_left, idx[left]))
        stack.append((a_right, b, idx[~left]))
    return True


def is_hierarchical(p: Partition) -> bool:
    """True iff ``p`` is reachable from its root by guillotine (hierarchical) splits."""
    if not isinstance(p, Partition):
        raise NotAPartition("expected a Partition")
    return _guillotine(p.root, list(p.rects), dyadic=False)


def is_rdp(p: Partition) -> bool:
    """True iff ``p`` is a recursive dyadic partition of its root.

    Works in every dimension by searching for an uncut dyadic midpoint split
    at each level; for d <= 2 this agrees with the product-of-dyadic-intervals
    test in :func:`is_product_of_dyadic`, which is not sufficient for d > 2.
    """
    if not isinstance(p, Partition):
        raise NotAPartition("expected a Partition")
    return _guillotine(p.root, list(p.rects), dyadic=True)


def dyadic_intervals(a: int, b: int) -> list[tuple[int, int]]:
    """All intervals reachable from ``[a, b]`` by repeated dyadic splits (preorder)."""
    out = []
    stack = [(a, b)]
    while stack:
        lo, hi = stack.pop()
        out.append((lo, hi))
        if hi > lo:
            c = dyadic_cut(lo, hi)
            stack.append((c + 1, hi))
            stack.append((lo, c))
    return out


def is_product_of_dyadic(p: Partition) -> bool:
    """Every rectangle is a product of dyadic intervals of the root's sides."""
    sets = [set(dyadic_intervals(a, b)) for a, b in zip(p.root.lo, p.root.hi)]
    return all((r.lo[k], r.hi[k]) in sets[k] for r in p.rects for k in range(r.d))


def trivial_partition(root: Rect, family: str = RDP) -> Partition:
    return Partition(root, (root,), family)
