"""Variation functionals and the approximation schemes built on them."""
from __future__ import annotations

from math import comb, factorial, log2

import numpy as np

from .lattice import RDP, Partition, Rect, as_ndarray, dyadic_cut, dyadic_split


def tv(theta) -> float:
    """Total variation over the edges of the lattice graph."""
    arr = as_ndarray(theta)
    return float(sum(np.abs(np.diff(arr, axis=k)).sum() for k in range(arr.ndim)))


def higher_order_variation(theta, r: int) -> float:
    """``n^(r-1) * |D^r theta|_1`` for a 1-D vector of length n."""
    arr = np.asarray(theta, dtype=float).ravel()
    n = arr.size
    if r < 1:
        raise ValueError("order must be >= 1")
    if n <= r:
        raise ValueError(f"order too large: need n > r, got n={n}, r={r}")
    return float(n ** (r - 1) * np.abs(np.diff(arr, r)).sum())


def tv_delta_scheme(theta, delta: float) -> Partition:
    """RDP whose pieces each have total variation at most ``delta``.

    Generation g of the split tree cuts along axis ``g mod d`` (falling back
    to the next axis in cyclic order when that side has length 1), and a
    node stops as soon as its restricted total variation is <= delta.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    arr = as_ndarray(theta)
    d = arr.ndim
    root = Rect.full(arr.shape)
    leaves = []
    frontier = [root]
    gen = 0
    while frontier:
        nxt = []
        for r in frontier:
            if tv(arr[r.slices]) <= delta:
                leaves.append(r)
                continue
            for j in range(d):
                axis = (gen + j) % d
                if r.shape[axis] > 1:
                    break
            nxt.extend(dyadic_split(r, axis + 1))
        frontier = nxt
        gen += 1
    return Partition(root, tuple(leaves), RDP)


def tv_delta_bound(theta, delta: float) -> float:
    arr = as_ndarray(theta)
    return 1 + log2(arr.size) * (1 + tv(arr) / delta)


def _aspect(arr: np.ndarray) -> float:
    return max(arr.shape) / min(arr.shape)


def gns_check(theta) -> tuple[float, float]:
    """Squared deviation from the mean vs ``(1 + aspect)^2 TV^2`` (needs d >= 2)."""
    arr = as_ndarray(theta)
    if arr.ndim < 2:
        raise ValueError("the lattice inequality needs d >= 2")
    dev = arr - arr.mean()
    return float(np.sum(dev * dev)), (1 + _aspect(arr)) ** 2 * tv(arr) ** 2


def gns_check_fractional(theta) -> tuple[float, float]:
    """The ``d/(d-1)`` power form; reported alongside :func:`gns_check`."""
    arr = as_ndarray(theta)
    if arr.ndim < 2:
        raise ValueError("the lattice inequality needs d >= 2")
    p = arr.ndim / (arr.ndim - 1)
    lhs = float(np.sum(np.abs(arr - arr.mean()) ** p))
    return lhs, ((1 + _aspect(arr)) * tv(arr)) ** p


def mean_bound_1d(theta) -> tuple[float, float]:
    arr = np.asarray(theta, dtype=float).ravel()
    dev = arr - arr.mean()
    return float(dev @ dev), arr.size * tv(arr) ** 2


def leading_differences(theta, r: int) -> np.ndarray:
    """``[D^0(theta)_1, D^1(theta)_1, ..., D^(r-1)(theta)_1]``."""
    arr = np.asarray(theta, dtype=float).ravel()
    return np.array([np.diff(arr, j)[0] for j in range(r)])


def buildup(top_diff, heads, n: int) -> np.ndarray:
    """Rebuild a length-n vector from its r-th differences and leading differences.

    ``alpha_i = sum_{j<=i-r} C(i-j-1, r-1) top_j + sum_{j<=r} C(i-1, j-1) heads_j``
    with 1-based ``i`` and ``r = len(heads)``.
    """
    r = len(heads)
    top = np.asarray(top_diff, dtype=float)
    out = np.zeros(n)
    for i in range(1, n + 1):
        acc = sum(comb(i - 1, j - 1) * heads[j - 1] for j in range(1, r + 1))
        for j in range(1, i - r + 1):
            acc += comb(i - j - 1, r - 1) * top[j - 1]
        out[i - 1] = acc
    return out


def poly_approx_1d(theta, r: int):
    """Degree r-1 polynomial sequence matching the first r leading differences.

    Returns ``(poly, sup_err)``.  The residual ``theta - poly`` is determined
    by ``D^r(theta)`` alone.
    """
    arr = np.asarray(theta, dtype=float).ravel()
    if r < 1:
        raise ValueError("order must be >= 1")
    if arr.size < r:
        raise ValueError(f"need n >= r, got n={arr.size}, r={r}")
    poly = buildup(np.zeros(max(arr.size - r, 0)), leading_differences(arr, r), arr.size)
    return poly, float(np.max(np.abs(arr - poly)))


def sup_error_constant(r: int) -> float:
    """Constant C_r in ``|theta - approx|_inf <= C_r V delta``.

    Each residual entry is a sum of ``C(i-j-1, r-1) D^r_j`` with
    ``C(i-j-1, r-1) <= m^(r-1) / (r-1)!`` on a piece of length m.
    """
    return 1.0 / factorial(r - 1)


def piece_count_constant(r: int) -> float:
    """A_r with ``k <= A_r delta^(-1/r)`` for r >= 2, delta <= 1 and n a power of 2.

    Summing ``min(2^(-l(r-1)) / delta, 2^l)`` over l: the geometric part below
    the crossover is < 2x and the tail is < x / (1 - 2^(1-r)), x = delta^(-1/r).
    """
    if r < 2:
        raise ValueError("no delta^(-1/r) piece bound for r = 1")
    return 3 + 1 / (1 - 2.0 ** (1 - r))


def _complexity(seg: np.ndarray, r: int) -> float:
    if seg.size <= r:
        return 0.0
    return seg.size ** (r - 1) * float(np.abs(np.diff(seg, r)).sum())


def piecewise_poly_approx(theta, r: int, delta: float):
    """Dyadic piecewise degree r-1 approximation with sup error <= C_r V delta.

    An interval I stops splitting once ``|I|^(r-1) |D^r theta_I|_1 <= V delta``
    with ``V`` the order-r variation of the whole vector.  Returns
    ``(approx, partition)``.
    """
    arr = np.asarray(theta, dtype=float).ravel()
    n = arr.size
    if not delta > 0:
        raise ValueError("delta must be positive")
    if n <= r:
        raise ValueError(f"need n > r, got n={n}, r={r}")
    budget = higher_order_variation(arr, r) * delta
    approx = np.empty(n)
    leaves = []
    stack = [(1, n)]
    while stack:
        a, b = stack.pop()
        seg = arr[a - 1: b]
        if _complexity(seg, r) <= budget:
            leaves.append(Rect((a,), (b,)))
            approx[a - 1: b] = seg if seg.size < r else poly_approx_1d(seg, r)[0]
        else:
            c = dyadic_cut(a, b)
            stack += [(c + 1, b), (a, c)]
    return approx, Partition(Rect((1,), (n,)), tuple(leaves), RDP)
