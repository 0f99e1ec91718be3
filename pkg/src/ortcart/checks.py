"""Randomized inequality and refinement-bound suites.

Each suite yields ``Trial`` records; a trial that fails carries a
serialized copy of its input so the case can be replayed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .formats import format_tensor, partition_to_json
from .lattice import Partition, is_rdp
from .random_partitions import (random_composition, random_pinwheel, random_sparse,
                                random_split_partition)
from .refine import (refine_1d_bound, refine_1d_to_rdp, refine_2d_bound, refine_2d_to_rdp,
                     sparse_to_hierarchical)
from .variation import gns_check, mean_bound_1d

GNS_SHAPES = ((4, 4), (8, 4), (8, 8), (4, 4, 4))
MEAN_SIZES = (10, 100)
SLACK = 1e-12


@dataclass
class Trial:
    label: str
    ok: bool
    detail: str = ""
    payload: str = ""


def _holds(lhs: float, rhs: float) -> bool:
    return lhs <= rhs * (1 + SLACK) + SLACK


def _random_array(shape, rng, kind: int) -> np.ndarray:
    if kind == 0:
        return rng.standard_normal(shape)
    if kind == 1:
        # piecewise constant on a random guillotine partition
        p = random_split_partition(shape, int(rng.integers(1, 6)), rng)
        vals = rng.standard_normal(len(p))
        return vals[p.label_array()]
    return random_sparse(shape, int(rng.integers(1, 4)), rng)


def gns_suite(trials: int, rng) -> Iterator[Trial]:
    for shape in GNS_SHAPES:
        for t in range(trials):
            arr = _random_array(shape, rng, t % 3)
            lhs, rhs = gns_check(arr)
            yield Trial(f"gns {shape} #{t}", _holds(lhs, rhs), f"lhs={lhs:.6g} rhs={rhs:.6g}",
                        format_tensor(arr))


def meanbound_suite(trials: int, rng) -> Iterator[Trial]:
    for n in MEAN_SIZES:
        for t in range(trials):
            arr = rng.standard_normal(n) if t % 2 == 0 else np.cumsum(rng.standard_normal(n))
            lhs, rhs = mean_bound_1d(arr)
            yield Trial(f"meanbound n={n} #{t}", _holds(lhs, rhs),
                        f"lhs={lhs:.6g} rhs={rhs:.6g}", format_tensor(arr))


def _part_payload(p: Partition) -> str:
    return "root " + " ".join(map(str, p.root.hi)) + "\n" + partition_to_json(p)


def refine_suite(trials: int, rng) -> Iterator[Trial]:
    for t in range(trials):
        n = int(rng.integers(2, 65))
        p = random_composition(n, int(rng.integers(1, n + 1)), rng)
        out = refine_1d_to_rdp(p, warmup=bool(t % 2))
        bound = refine_1d_bound(n, len(p))
        ok = is_rdp(out) and out.refines(p) and len(out) <= bound
        yield Trial(f"refine1d n={n} #{t}", ok, f"pieces={len(out)} bound={bound:.6g}",
                    _part_payload(p))

        n = int(rng.integers(3, 65))
        if t % 3 == 2:
            p = random_pinwheel(n, rng)
        else:
            p = random_split_partition((n, n), int(rng.integers(1, 12)), rng)
        out = refine_2d_to_rdp(p)
        bound = refine_2d_bound(n, len(p))
        ok = is_rdp(out) and out.refines(p) and len(out) <= bound
        yield Trial(f"refine2d n={n} #{t}", ok, f"pieces={len(out)} bound={bound}",
                    _part_payload(p))

        d = 2 + t % 2
        n = int(rng.integers(2, 65 if d == 2 else 17))
        theta = random_sparse((n,) * d, int(rng.integers(0, 9)), rng)
        out = sparse_to_hierarchical(theta)
        nnz = int(np.count_nonzero(theta))
        bound = 3 * d * nnz + 1
        const = all(np.ptp(theta[r.slices]) == 0 for r in out.rects)
        ok = out.check_family() and const and len(out) <= bound
        yield Trial(f"sparse d={d} n={n} #{t}", ok, f"pieces={len(out)} bound={bound}",
                    format_tensor(theta))


SUITES = {"gns": gns_suite, "meanbound": meanbound_suite, "refine": refine_suite}


def run_suite(name: str, trials: int, seed: int) -> Iterator[Trial]:
    return SUITES[name](trials, np.random.default_rng(seed))
