"""Random partition generators used by the property suites."""
from __future__ import annotations

import numpy as np

from .lattice import ARBITRARY, HIER, RDP, Partition, Rect, dyadic_split, hierarchical_split


def random_composition(n: int, k: int, rng) -> Partition:
    """1-D partition of ``[1, n]`` into ``k`` intervals with uniform breakpoints."""
    k = max(1, min(k, n))
    cuts = np.sort(rng.choice(np.arange(1, n), size=k - 1, replace=False)) if k > 1 else []
    bounds = [0, *[int(c) for c in cuts], n]
    rects = tuple(Rect((a + 1,), (b,)) for a, b in zip(bounds[:-1], bounds[1:]))
    return Partition(Rect((1,), (n,)), rects, ARBITRARY)


def random_split_partition(dims, k: int, rng, dyadic: bool = False) -> Partition:
    """Grow a hierarchical (or dyadic) partition by ``k - 1`` random splits."""
    root = Rect.full(dims)
    pieces = [root]
    for _ in range(k - 1):
        splittable = [i for i, r in enumerate(pieces) if r.size > 1]
        if not splittable:
            break
        r = pieces.pop(splittable[rng.integers(len(splittable))])
        axes = [j for j in range(r.d) if r.shape[j] > 1]
        axis = axes[rng.integers(len(axes))] + 1
        if dyadic:
            pieces.extend(dyadic_split(r, axis))
        else:
            cut = int(rng.integers(r.lo[axis - 1], r.hi[axis - 1]))
            pieces.extend(hierarchical_split(r, axis, cut))
    return Partition(root, tuple(pieces), RDP if dyadic else HIER)


def random_pinwheel(n: int, rng) -> Partition:
    """Pinwheel (non-guillotine) partition of ``[1, n]^2`` with random cuts a < b < n."""
    a, b = sorted(int(x) for x in rng.choice(np.arange(1, n), size=2, replace=False))
    rects = (
        Rect((1, 1), (a, b)),
        Rect((1, b + 1), (b, n)),
        Rect((b + 1, a + 1), (n, n)),
        Rect((a + 1, 1), (n, a)),
        Rect((a + 1, a + 1), (b, b)),
    )
    return Partition(Rect.full((n, n)), rects, ARBITRARY)


def random_sparse(dims, nnz: int, rng) -> np.ndarray:
    theta = np.zeros(dims)
    flat = theta.reshape(-1)
    idx = rng.choice(flat.size, size=min(nnz, flat.size), replace=False)
    flat[idx] = rng.normal(size=idx.size) + np.sign(rng.normal(size=idx.size))
    flat[flat == 0] = 1.0
    return theta
