"""Per-rectangle polynomial least squares.

Monomials are evaluated at globally scaled coordinates ``i_k / n_k`` so that
the sufficient statistics of a rectangle (cell count, sums, Gram matrix
``B_R^T B_R`` and moment vector ``B_R^T y_R``) are additive over disjoint
unions.  Normal equations are solved through a symmetric eigendecomposition;
directions whose eigenvalue falls below ``PIVOT_RTOL`` times the largest one
are dropped, which gives the minimum-norm least-squares solution when the
rectangle has fewer cells than basis functions or collinear columns.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Sequence

import numpy as np

from .lattice import LatticeArray, Partition, Rect, as_ndarray

PIVOT_RTOL = 1e-10


@dataclass(frozen=True)
class PolyBasis:
    """Monomials of total degree <= ``degree`` in ``dim_d`` variables.

    Exponents are in graded lexicographic order: by total degree, then
    lexicographically with the first variable largest, e.g. for d=2, r=2:
    1, x1, x2, x1^2, x1 x2, x2^2.
    """

    degree: int
    dim_d: int

    def __post_init__(self):
        if self.degree < 0 or self.dim_d < 1:
            raise ValueError(f"bad basis degree={self.degree} d={self.dim_d}")

    @property
    def exponents(self) -> tuple[tuple[int, ...], ...]:
        exps = [e for e in itertools.product(range(self.degree + 1), repeat=self.dim_d)
                if sum(e) <= self.degree]
        exps.sort(key=lambda e: (sum(e), tuple(-x for x in e)))
        return tuple(exps)

    @property
    def basis_dim(self) -> int:
        return comb(self.degree + self.dim_d, self.dim_d)

    def evaluate(self, coords: np.ndarray) -> np.ndarray:
        """Monomial values at scaled coordinates ``coords`` of shape (..., d)."""
        coords = np.asarray(coords, dtype=float)
        out = np.ones(coords.shape[:-1] + (self.basis_dim,))
        for j, e in enumerate(self.exponents):
            for k, p in enumerate(e):
                if p:
                    out[..., j] *= coords[..., k] ** p
        return out


def basis_value(basis: PolyBasis, point: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    point = np.asarray(point, dtype=float)
    dims = np.asarray(dims, dtype=float)
    if point.shape != (basis.dim_d,) or np.any(point < 1) or np.any(point > dims):
        raise ValueError(f"point {point} not inside lattice {dims}")
    return basis.evaluate(point / dims)


def design_matrix(basis: PolyBasis, rect: Rect, dims: Sequence[int]) -> np.ndarray:
    """Rows of monomial values for the cells of ``rect`` in row-major order."""
    return basis.evaluate(rect.cells() / np.asarray(dims, dtype=float))


def lattice_basis(basis: PolyBasis, dims: Sequence[int]) -> np.ndarray:
    """Monomial values for every lattice cell, shape ``dims + (L,)``."""
    grids = np.meshgrid(*[np.arange(1, n + 1) / n for n in dims], indexing="ij")
    return basis.evaluate(np.stack(grids, axis=-1))


@dataclass(frozen=True, eq=False)
class RectStats:
    count: int
    sum: float
    sumsq: float
    gram: np.ndarray
    moment: np.ndarray

    def __add__(self, other: "RectStats") -> "RectStats":
        return RectStats(self.count + other.count, self.sum + other.sum,
                         self.sumsq + other.sumsq, self.gram + other.gram,
                         self.moment + other.moment)


def rect_stats(y, rect: Rect, basis: PolyBasis) -> RectStats:
    arr = as_ndarray(y)
    yr = arr[rect.slices].ravel()
    B = design_matrix(basis, rect, arr.shape)
    return RectStats(int(yr.size), float(yr.sum()), float(yr @ yr), B.T @ B, B.T @ yr)


def solve_normal(gram: np.ndarray, moment: np.ndarray):
    """Minimum-norm solution of stacked normal equations.

    ``gram`` has shape (..., L, L) and ``moment`` (..., L).  Returns the
    coefficients (..., L) and the explained sum of squares ``m^T G^+ m``.
    """
    w, V = np.linalg.eigh(gram)
    keep = w > PIVOT_RTOL * w[..., -1:]
    inv = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
    proj = np.einsum("...ji,...j->...i", V, moment)
    coeffs = np.einsum("...ij,...j->...i", V, inv * proj)
    return coeffs, np.sum(inv * proj * proj, axis=-1)


def sse_from_stats(sumsq, gram, moment, order: int):
    """Residual sum of squares of the polynomial fit, clamped at zero."""
    if order == 0:
        count = gram[..., 0, 0]
        s = moment[..., 0]
        return np.maximum(sumsq - s * s / count, 0.0)
    _, explained = solve_normal(gram, moment)
    return np.maximum(sumsq - explained, 0.0)


def fit_rect(y, rect: Rect, basis: PolyBasis, stats: RectStats | None = None):
    """Least-squares polynomial on ``rect``: returns ``(coeffs, sse)``."""
    if stats is None:
        stats = rect_stats(y, rect, basis)
    coeffs, explained = solve_normal(stats.gram, stats.moment)
    if basis.degree == 0:
        mean = stats.sum / stats.count
        return np.array([mean]), max(stats.sumsq - stats.sum * mean, 0.0)
    return coeffs, max(stats.sumsq - float(explained), 0.0)


@dataclass(frozen=True, eq=False)
class FitResult:
    partition: Partition
    coeffs: tuple[np.ndarray, ...]
    fitted: LatticeArray
    objective: float
    lam: float | None
    order: int

    @property
    def pieces(self) -> int:
        return len(self.partition)

    @property
    def sse(self) -> float:
        return self.objective - (self.lam or 0.0) * self.pieces


def assemble_fit(y, p: Partition, basis: PolyBasis, lam=None, order=None) -> FitResult:
    arr = as_ndarray(y)
    fitted = np.empty_like(arr)
    coeffs = []
    for r in p.rects:
        c, _ = fit_rect(arr, r, basis)
        fitted[r.slices] = (design_matrix(basis, r, arr.shape) @ c).reshape(r.shape)
        coeffs.append(c)
    resid = arr - fitted
    objective = float(np.sum(resid * resid)) + (lam or 0.0) * len(p)
    return FitResult(p, tuple(coeffs), LatticeArray(arr.shape, fitted), objective,
                     lam, basis.degree if order is None else order)


def project_partition(y, p: Partition, basis: PolyBasis, lam: float | None = None) -> FitResult:
    """Orthogonal projection of ``y`` onto piecewise polynomials on ``p``."""
    arr = as_ndarray(y)
    if p.root != Rect.full(arr.shape):
        raise ValueError(f"partition root {p.root} does not match lattice {arr.shape}")
    return assemble_fit(arr, p, basis, lam)
