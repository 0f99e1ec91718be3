import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ortcart.lattice import HIER, RDP, Rect, is_hierarchical, is_rdp
from ortcart.oracle import exact_penalized_lse
from ortcart.solver import TableLookupError, build_tables, opt_value, reconstruct, solve


def test_two_step_1d():
    y = np.array([0.0, 0, 10, 10])
    fit = solve(y, 0, 2.0, HIER)
    assert [r for r in fit.partition.rects] == [Rect((1,), (2,)), Rect((3,), (4,))]
    assert fit.fitted.values.tolist() == [0, 0, 10, 10]
    assert fit.objective == pytest.approx(4.0, abs=1e-12)
    assert opt_value(y, 0, 2.0, HIER) == pytest.approx(4.0, abs=1e-12)
    assert opt_value(y, 0, 200.0, HIER) == pytest.approx(300.0, abs=1e-9)


@pytest.mark.parametrize("order", [0, 1, 2])
@pytest.mark.parametrize("family", [RDP, HIER])
def test_constant_array(order, family):
    fit = solve(np.full((5, 6), 3.3), order, 0.7, family)
    assert fit.pieces == 1
    assert fit.objective == pytest.approx(0.7, abs=1e-9)
    assert opt_value(np.full((4, 4), 1.0), order, 3.0, family) == pytest.approx(3.0, abs=1e-9)


def test_column_blocks_rdp():
    y = np.zeros((4, 4))
    y[:, 2:] = 7
    tables = build_tables(y, 0, 1.0, RDP)
    assert tables.split_of(tables.root) == (2, 2)
    fit = solve(y, 0, 1.0, RDP)
    assert fit.objective == pytest.approx(2.0, abs=1e-12)
    assert fit.partition.rects == (Rect((1, 1), (4, 2)), Rect((1, 3), (4, 4)))


def test_reconstruct_trivial_and_lookup():
    tables = build_tables(np.ones(6), 0, 1.0, RDP)
    assert tables.split_of(tables.root) is None
    assert len(reconstruct(tables)) == 1
    with pytest.raises(TableLookupError):
        tables.index(Rect((2,), (3,)))  # not dyadic in [1, 6]


def test_bad_lambda():
    with pytest.raises(ValueError, match="lambda must be positive"):
        solve(np.ones(4), 0, 0.0, RDP)


@pytest.mark.parametrize("family", [RDP, HIER])
def test_output_family(family, rng):
    for _ in range(10):
        y = rng.normal(size=(int(rng.integers(2, 12)), int(rng.integers(2, 12))))
        p = solve(y, int(rng.integers(0, 2)), 0.5, family).partition
        assert is_hierarchical(p)
        assert is_rdp(p) or family == HIER


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(2, 9), st.integers(2, 9), st.sampled_from([RDP, HIER]),
       st.integers(0, 1), st.floats(0.1, 10), st.floats(0.2, 5), st.integers(0, 2**32 - 1))
def test_scaling(d, n1, n2, family, order, lam, c, seed):
    dims = (n1, n2, 2)[:d]
    y = np.random.default_rng(seed).normal(size=dims)
    a = solve(y, order, lam, family)
    b = solve(c * y, order, c * c * lam, family)
    assert b.partition == a.partition
    assert np.allclose(b.fitted.values, c * a.fitted.values, atol=1e-8)
    assert b.objective == pytest.approx(c * c * a.objective, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10), st.integers(2, 10), st.integers(0, 1), st.floats(0.01, 20),
       st.integers(0, 2**32 - 1))
def test_family_nesting(n1, n2, order, lam, seed):
    y = np.random.default_rng(seed).normal(size=(n1, n2))
    assert opt_value(y, order, lam, HIER) <= opt_value(y, order, lam, RDP) + 1e-9


@pytest.mark.parametrize("dims", [(8,), (3, 3), (2, 4), (4, 2, 2)])
@pytest.mark.parametrize("family", [RDP, HIER])
def test_penalty_monotonicity(dims, family, rng):
    lams = np.geomspace(0.01, 100, 25)
    for _ in range(5):
        y = rng.normal(size=dims) + rng.integers(0, 3, size=dims)
        ks = [solve(y, 0, lam, family).pieces for lam in lams]
        assert all(a >= b for a, b in zip(ks, ks[1:]))
        oracle = [exact_penalized_lse(y, 0, lam, family).pieces for lam in lams]
        assert ks == oracle


@pytest.mark.parametrize("dims", [(16,), (7, 9), (8, 8), (4, 6, 5)])
def test_table_sizes(dims):
    y = np.zeros(dims)
    rdp = build_tables(y, 0, 1.0, RDP)
    hier = build_tables(y, 0, 1.0, HIER)
    assert rdp.opt.size <= np.prod([2 * n for n in dims])
    assert hier.opt.size == np.prod([n * (n + 1) // 2 for n in dims])


def test_rdp_work_grows_about_linearly():
    # rectangle table is O(2^d N); timing ratio is a loose guard only
    rng = np.random.default_rng(0)
    times = []
    for n in (64, 256):
        y = rng.normal(size=(n, n))
        t0 = time.perf_counter()
        solve(y, 0, 1.0, RDP)
        times.append(time.perf_counter() - t0)
    assert times[1] / max(times[0], 1e-3) < 16 * 4


@pytest.mark.parametrize("family", [RDP, HIER])
@pytest.mark.parametrize("order", [0, 1])
def test_threads_agree(family, order, rng):
    y = rng.normal(size=(12, 10))
    a = solve(y, order, 0.3, family, threads=1)
    b = solve(y, order, 0.3, family, threads=4)
    assert a.partition == b.partition
    assert abs(a.objective - b.objective) <= 1e-9
    assert np.array_equal(solve(y, order, 0.3, family).fitted.values, a.fitted.values)
