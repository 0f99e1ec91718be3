"""Acceptance criteria, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line with the measured
numbers and wall time, then asserts.  Run on its own with::

    pytest tests/test_acceptance.py -v
"""
import itertools
import time

import numpy as np
import pytest

from ortcart.checks import gns_suite, meanbound_suite, refine_suite
from ortcart.lattice import HIER, RDP, Rect, is_rdp
from ortcart.oracle import ALL, enumeration_report
from ortcart.random_partitions import random_split_partition
from ortcart.simlab import Scenario, run_scenario
from ortcart.solver import build_tables, opt_value, solve
from ortcart.variation import (buildup, higher_order_variation, leading_differences,
                               piecewise_poly_approx, poly_approx_1d, sup_error_constant, tv,
                               tv_delta_bound, tv_delta_scheme)

SEED = 0
_cache = {}


@pytest.fixture
def report(capsys):
    t0 = time.perf_counter()

    def emit(tag, ok, detail, limit):
        dt = time.perf_counter() - t0
        ok = ok and dt < limit
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {tag}: {detail} ({dt:.1f}s, limit {limit:.0f}s)")
        return ok

    return emit


def small_shapes():
    yield from ((n,) for n in range(2, 9))
    yield from itertools.product((2, 3, 4), repeat=2)
    yield (2, 2, 2)


def test_c1_oracle_equivalence(report):
    rng = np.random.default_rng(SEED)
    worst, cases, bad = 0.0, 0, []
    for dims in small_shapes():
        for _ in range(25):
            y = rng.standard_normal(dims)
            for order, lam, fam in itertools.product((0, 1), (0.1, 1.0, 10.0), (RDP, HIER)):
                ref = enumeration_report(y, order, lam, fam).best_objective
                tables = build_tables(y, order, lam, fam)
                fit = solve(y, order, lam, fam)
                err = max(abs(tables.opt_of(tables.root) - ref), abs(fit.objective - ref))
                worst = max(worst, err)
                cases += 1
                if err > 1e-9:
                    bad.append((dims, order, lam, fam, err))
    ok = report("C1 oracle equivalence", not bad,
                f"{cases} cases, max |dp - oracle| = {worst:.2e}, {len(bad)} over 1e-9", 120)
    assert ok, bad[:5]


def test_c2_family_nesting(report):
    rng = np.random.default_rng(SEED)
    viol = []
    gaps = []
    for i in range(200):
        dims = tuple(int(n) for n in rng.integers(2, 33, size=2))
        order = int(rng.integers(0, 2))
        lam = float(np.exp(rng.uniform(np.log(0.05), np.log(20))))
        y = rng.standard_normal(dims) + rng.integers(0, 3, size=dims)
        h, r = opt_value(y, order, lam, HIER), opt_value(y, order, lam, RDP)
        gaps.append(r - h)
        if h > r + 1e-9:
            viol.append(("hier>rdp", dims, order, lam))
    shapes = [s for s in small_shapes() if s != (1,)]
    for i in range(200):
        dims = shapes[i % len(shapes)]
        order = int(rng.integers(0, 2))
        lam = float(np.exp(rng.uniform(np.log(0.05), np.log(20))))
        y = rng.standard_normal(dims)
        a, h, r = (enumeration_report(y, order, lam, f).best_objective for f in (ALL, HIER, RDP))
        if not (a <= h + 1e-9 and a <= r + 1e-9 and h <= r + 1e-9):
            viol.append(("chain", dims, order, lam))
    ok = report("C2 family nesting", not viol,
                f"200 lattice instances (n<=32) + 200 enumerable, {len(viol)} violations, "
                f"median rdp-hier gap {np.median(gaps):.3g}", 120)
    assert ok, viol[:5]


def test_c3_inequality_suites(report):
    # the suites mix Gaussian, piecewise-constant and sparse arrays
    trials = list(gns_suite(1000, np.random.default_rng(SEED)))
    trials += list(meanbound_suite(1000, np.random.default_rng(SEED)))
    bad = [t for t in trials if not t.ok]
    ok = report("C3 inequality suites", not bad,
                f"{len(trials)} trials (1000 per shape / size), {len(bad)} violations", 60)
    assert ok, [(t.label, t.detail) for t in bad[:5]]


def _bv_array(n, rng):
    p = random_split_partition((n, n), int(rng.integers(1, 9)), rng)
    theta = rng.normal(size=len(p))[p.label_array()]
    i, j = np.meshgrid(np.arange(n) / n, np.arange(n) / n, indexing="ij")
    return theta + rng.uniform(0, 2) * np.sin(2 * np.pi * rng.uniform(0.5, 2) * i) * j


def test_c4_tv_delta_scheme(report):
    rng = np.random.default_rng(SEED)
    bad, cases = [], 0
    max_ratio = 0.0
    for i in range(200):
        n = (16, 32)[i % 2]
        theta = _bv_array(n, rng)
        for delta in (0.5, 1.0, 2.0):
            p = tv_delta_scheme(theta, delta)
            bound = tv_delta_bound(theta, delta)
            cases += 1
            max_ratio = max(max_ratio, len(p) / bound)
            checks = (len(p) <= bound,
                      all(tv(theta[r.slices]) <= delta for r in p.rects),
                      all(r.aspect_ratio <= 2 for r in p.rects),
                      is_rdp(p))
            if not all(checks):
                bad.append((i, delta, checks))
    ok = report("C4 (TV, delta) scheme", not bad,
                f"{cases} cases, max pieces/bound = {max_ratio:.3f}, {len(bad)} violations", 60)
    assert ok, bad[:5]


def test_c5_refinement_suites(report):
    trials = list(refine_suite(200, np.random.default_rng(SEED)))
    bad = [t for t in trials if not t.ok]
    ok = report("C5 refinement suites", not bad,
                f"{len(trials)} trials (200 each: 1-D, 2-D, sparse), {len(bad)} violations", 60)
    assert ok, [(t.label, t.detail) for t in bad[:5]]


def _random_vector(n, r, rng):
    v = rng.standard_normal(n)
    for _ in range(int(rng.integers(0, r + 1))):
        v = np.cumsum(v)
    return v * rng.uniform(0.1, 10)


def test_c6_polynomial_approximation(report):
    rng = np.random.default_rng(SEED)
    bad = []
    worst_bd = worst_res = worst_sup = 0.0
    for i in range(200):
        r = 1 + i % 4
        n = int(rng.integers(r + 1, 65))
        th = _random_vector(n, r, rng)
        poly, err = poly_approx_1d(th, r)
        want, got = leading_differences(th, r), leading_differences(poly, r)
        bd = float(np.max(np.abs(got - want) / np.maximum(np.abs(want), 1e-300 + np.abs(want).max())))
        resid = buildup(np.diff(th, r), np.zeros(r), n)
        res = float(np.abs((th - poly) - resid).max() / max(np.abs(th).max(), 1e-300))
        worst_bd, worst_res = max(worst_bd, bd), max(worst_res, res)
        if bd > 1e-8 or res > 1e-8:
            bad.append(("identity", i, r, n, bd, res))
        V = higher_order_variation(th, r)
        for j in range(1, 7):
            delta = 2.0 ** -j
            approx, p = piecewise_poly_approx(th, r, delta)
            allowed = sup_error_constant(r) * V * delta
            sup = float(np.abs(approx - th).max())
            if allowed > 0:
                worst_sup = max(worst_sup, sup / allowed)
            if sup > allowed * (1 + 1e-9) + 1e-9 or not is_rdp(p):
                bad.append(("sup", i, r, n, delta, sup, allowed))
    ok = report("C6 polynomial approximation", not bad,
                f"200 vectors x 6 deltas; max boundary rel err {worst_bd:.1e}, "
                f"max residual rel err {worst_res:.1e}, max sup/(C_r V delta) {worst_sup:.3f}", 60)
    assert ok, bad[:5]


def scenario(key, threads=1):
    name, sizes, reps = {
        "twopiece": ("twopiece2d", (16, 32, 64, 128), 20),
        "smooth": ("smooth2d", (16, 32, 64, 128), 20),
        "pwlinear": ("pwlinear1d", tuple(2 ** k for k in range(7, 13)), 20),
        "pinwheel_hier": ("pinwheel2d", (12, 18, 24, 30), 10),
    }[key]
    return Scenario.default(name, sizes, reps=reps, seed=SEED)


def table(key, threads=1):
    if (key, threads) not in _cache:
        s = scenario(key)
        _cache[key, threads] = run_scenario(s, threads=threads)
    return _cache[key, threads]


def test_c7_dyadic_cart_slopes(report):
    a, b = table("twopiece").slope, table("smooth").slope
    ok = report("C7 Dyadic CART slopes", -1.6 <= a <= -0.85 and -0.75 <= b <= -0.40,
                f"twopiece2d {a:.3f} in [-1.6,-0.85]; smooth2d {b:.3f} in [-0.75,-0.40]", 300)
    assert ok


def test_c8_order1_slope(report):
    s = table("pwlinear").slope
    # other seeds, for context only: the criterion is evaluated at the fixed seed
    others = [run_scenario(Scenario.default("pwlinear1d", scenario("pwlinear").sizes,
                                            reps=20, seed=k)).slope for k in range(1, 6)]
    ok = report("C8 order-1 Dyadic CART slope", -1.0 <= s <= -0.5,
                f"pwlinear1d {s:.4f} in [-1.0,-0.5] at seed {SEED}; seeds 1-5 give "
                f"{', '.join(f'{o:.3f}' for o in others)} (mean {np.mean(others):.3f})", 180)
    assert ok


def test_c9_ort_pinwheel(report):
    s = scenario("pinwheel_hier")
    ort = table("pinwheel_hier")
    dyadic = run_scenario(Scenario(s.name, s.sizes, s.sigma, s.reps, s.lambda_rule, s.order,
                                   RDP, s.seed))
    dominated = all(o[3] <= d[3] + 1e-9 for o, d in zip(ort.replicates, dyadic.replicates))
    ok = report("C9 ORT on pinwheel", ort.slope <= -0.6 and dominated,
                f"slope {ort.slope:.3f} <= -0.6 (lambda {s.lambda_rule}); ORT objective <= "
                f"Dyadic CART objective on {'all' if dominated else 'NOT all'} "
                f"{len(ort.replicates)} replicates; Dyadic CART slope {dyadic.slope:.3f}", 900)
    assert ok


def test_c10_determinism(report):
    keys = ("twopiece", "smooth", "pwlinear", "pinwheel_hier")
    same_bytes, worst = True, 0.0
    for key in keys:
        first = table(key).to_csv()
        again = run_scenario(scenario(key)).to_csv()
        same_bytes &= first == again
        threaded = table(key, threads=4)
        a = np.array([r[2:] for r in table(key).rows])
        b = np.array([r[2:] for r in threaded.rows])
        worst = max(worst, float(np.abs(a - b).max()), abs(table(key).slope - threaded.slope))
    ok = report("C10 determinism", same_bytes and worst <= 1e-9,
                f"reruns byte-identical: {same_bytes}; max |threads=4 - threads=1| = {worst:.1e}",
                900)
    assert ok
