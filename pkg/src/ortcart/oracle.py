"""Brute-force partition enumeration on tiny lattices.

This is the ground truth for the DP solver, so it deliberately shares no
numerical code with it: per-rectangle residuals come from a direct
``lstsq`` on an explicitly built design matrix and the optimum from a scan
over every partition in the family.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .lattice import ARBITRARY, HIER, RDP, LatticeArray, Partition, Rect, as_ndarray, dyadic_cut
from .polyfit import FitResult

MAX_CELLS = 16
ALL = "all"


class EnumerationTooLarge(ValueError):
    pass


def _guard(root: Rect):
    if root.size > MAX_CELLS:
        raise EnumerationTooLarge(
            f"refusing to enumerate partitions of {root.size} cells (limit {MAX_CELLS})")


def _halves(r: Rect, k: int, c: int):
    hi1, lo2 = list(r.hi), list(r.lo)
    hi1[k], lo2[k] = c, c + 1
    return Rect(r.lo, tuple(hi1)), Rect(tuple(lo2), r.hi)


@lru_cache(maxsize=None)
def _split_family(region: Rect, dyadic: bool) -> frozenset:
    out = {frozenset([region])}
    for k in range(region.d):
        a, b = region.lo[k], region.hi[k]
        cuts = [dyadic_cut(a, b)] if dyadic and b > a else range(a, b)
        for c in cuts:
            left, right = _halves(region, k, c)
            for pl in _split_family(left, dyadic):
                for pr in _split_family(right, dyadic):
                    out.add(pl | pr)
    return frozenset(out)


def _all_tilings(root: Rect):
    cells = [tuple(c) for c in root.cells()]
    pos = {c: i for i, c in enumerate(cells)}
    masks = {}
    for c in cells:
        anchored = []
        for hi in itertools.product(*[range(a, b + 1) for a, b in zip(c, root.hi)]):
            r = Rect(c, hi)
            m = 0
            for cell in r.cells():
                m |= 1 << pos[tuple(cell)]
            anchored.append((r, m))
        masks[c] = anchored
    full = (1 << len(cells)) - 1
    out = []

    def rec(covered, chosen):
        if covered == full:
            out.append(frozenset(chosen))
            return
        first = (~covered & (covered + 1)).bit_length() - 1
        for r, m in masks[cells[first]]:
            if not covered & m:
                chosen.append(r)
                rec(covered | m, chosen)
                chosen.pop()

    rec(0, [])
    return out


@lru_cache(maxsize=None)
def _family_members(root: Rect, family: str) -> tuple:
    _guard(root)
    if family == RDP:
        members = _split_family(root, True)
    elif family == HIER:
        members = _split_family(root, False)
    elif family in (ALL, ARBITRARY):
        members = _all_tilings(root)
    else:
        raise ValueError(f"unknown family {family!r}")
    return tuple(sorted(tuple(sorted(m)) for m in members))


def enumerate_partitions(root: Rect, family: str) -> Iterator[Partition]:
    """Every partition of ``root`` in ``family`` ('rdp', 'hier' or 'all'), once each."""
    tag = ARBITRARY if family == ALL else family
    for rects in _family_members(root, family):
        yield Partition(root, rects, tag)


def count_partitions(root: Rect, family: str) -> int:
    return len(_family_members(root, family))


def _monomials(order: int, d: int):
    return [e for e in itertools.product(range(order + 1), repeat=d) if sum(e) <= order]


def _rect_lstsq(arr: np.ndarray, r: Rect, order: int):
    dims = arr.shape
    pts = [np.array(c) / np.array(dims) for c in r.cells()]
    B = np.array([[np.prod(p ** np.array(e)) for e in _monomials(order, len(dims))]
                  for p in pts])
    yr = np.array([arr[tuple(np.array(c) - 1)] for c in r.cells()])
    coef, *_ = np.linalg.lstsq(B, yr, rcond=None)
    resid = yr - B @ coef
    return coef, float(resid @ resid), B @ coef


@dataclass(frozen=True)
class EnumerationReport:
    family: str
    count: int
    best_partition: Partition
    best_objective: float


@lru_cache(maxsize=None)
def _member_matrix(root: Rect, family: str):
    members = _family_members(root, family)
    rects = sorted({r for m in members for r in m})
    pos = {r: i for i, r in enumerate(rects)}
    counts = np.array([len(m) for m in members])
    idx = np.full((len(members), counts.max()), len(rects))
    for i, m in enumerate(members):
        idx[i, : len(m)] = [pos[r] for r in m]
    return members, rects, idx, counts


def _score(arr, order, lam, family):
    members, rects, idx, counts = _member_matrix(Rect.full(arr.shape), family)
    sse = np.array([_rect_lstsq(arr, r, order)[1] for r in rects] + [0.0])
    objs = sse[idx].sum(axis=1) + lam * counts
    best = objs.min()
    near = np.flatnonzero(objs <= best + 1e-12 * abs(best))
    pick = min(near, key=lambda i: (counts[i], i))
    return members, objs, int(pick)


def enumeration_report(y, order: int, lam: float, family: str) -> EnumerationReport:
    arr = as_ndarray(y)
    members, objs, i = _score(arr, order, lam, family)
    tag = ARBITRARY if family == ALL else family
    return EnumerationReport(family, len(members),
                             Partition(Rect.full(arr.shape), members[i], tag), float(objs[i]))


def exact_penalized_lse(y, order: int, lam: float, family: str) -> FitResult:
    """Penalised least squares over every partition of the family, by enumeration."""
    arr = as_ndarray(y)
    members, objs, i = _score(arr, order, lam, family)
    fitted = np.empty_like(arr)
    coeffs = []
    for r in members[i]:
        coef, _, fit = _rect_lstsq(arr, r, order)
        fitted[r.slices] = fit.reshape(r.shape)
        coeffs.append(coef)
    tag = ARBITRARY if family == ALL else family
    part = Partition(Rect.full(arr.shape), members[i], tag)
    return FitResult(part, tuple(coeffs), LatticeArray(arr.shape, fitted),
                     float(objs[i]), float(lam), order)


def min_pieces(theta, order: int, family: str, atol: float = 1e-9) -> int:
    """Smallest partition in ``family`` on which ``theta`` is piecewise degree-``order``."""
    arr = as_ndarray(theta)
    members, rects, idx, counts = _member_matrix(Rect.full(arr.shape), family)
    exact = np.array([_rect_lstsq(arr, r, order)[1] <= atol for r in rects] + [True])
    return int(counts[exact[idx].all(axis=1)].min())
