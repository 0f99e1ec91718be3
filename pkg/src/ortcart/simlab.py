"""Monte-Carlo MSE studies for Dyadic CART / ORT on synthetic truths."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import HIER, RDP, Partition, Rect
from .solver import solve

SCENARIOS = ("pinwheel2d", "twopiece2d", "smooth2d", "pwlinear1d")


class ScenarioError(ValueError):
    pass


def pinwheel_partition(n: int) -> Partition:
    """Five rectangles around a centre block, cut at a = n//3 and b = 2n//3."""
    if n < 6:
        raise ScenarioError("pinwheel needs n >= 6")
    a, b = n // 3, 2 * n // 3
    rects = (
        Rect((1, 1), (a, b)),
        Rect((1, b + 1), (b, n)),
        Rect((b + 1, a + 1), (n, n)),
        Rect((a + 1, 1), (n, a)),
        Rect((a + 1, a + 1), (b, b)),
    )
    return Partition(Rect.full((n, n)), rects)


def pinwheel_truth(n: int) -> np.ndarray:
    a, b = n // 3, 2 * n // 3
    theta = np.empty((n, n))
    theta[:a, :b] = 0
    theta[:b, b:] = 1
    theta[b:, a:] = 2
    theta[a:, :a] = 3
    theta[a:b, a:b] = 4
    return theta


def twopiece_truth(n: int) -> np.ndarray:
    """``theta(i, j) = 1{j <= n/2}``."""
    if n < 2 or n % 2:
        raise ScenarioError("twopiece truth needs an even n")
    theta = np.zeros((n, n))
    theta[:, : n // 2] = 1.0
    return theta


def smooth_truth(n: int) -> np.ndarray:
    if n < 2:
        raise ScenarioError("smooth truth needs n >= 2")
    s = np.sin(np.arange(1, n + 1) * np.pi / n)
    return np.outer(s, s)


def pwlinear_f(x):
    x = np.asarray(x, dtype=float)
    return (-44 * np.maximum(0, x - 0.3) + 48 * np.maximum(0, x - 0.55)
            - 56 * np.maximum(0, x - 0.8) + 0.28 * x)


def pwlinear_truth(N: int) -> np.ndarray:
    if N < 8:
        raise ScenarioError("pwlinear truth needs N >= 8")
    return pwlinear_f(np.arange(1, N + 1) / N)


TRUTHS = {
    "pinwheel2d": pinwheel_truth,
    "twopiece2d": twopiece_truth,
    "smooth2d": smooth_truth,
    "pwlinear1d": pwlinear_truth,
}

DEFAULT_SIGMA = {"pinwheel2d": 0.1, "twopiece2d": 1.0, "smooth2d": 1.0, "pwlinear1d": 1.0}

# order, family, lambda rule used when a study does not say otherwise
DEFAULTS = {
    "pinwheel2d": (0, HIER, "sigma2logN:2"),
    "twopiece2d": (0, RDP, "log2n"),
    "smooth2d": (0, RDP, "log2n"),
    "pwlinear1d": (1, RDP, "log2n"),
}


def parse_lambda_rule(rule: str):
    """Map a rule string to ``f(n, N, sigma) -> lambda``.

    ``log2n``          lambda = log2 n (side length n; n = N in 1-D)
    ``fixed:<v>``      constant lambda
    ``sigma2logN:<c>`` lambda = c * sigma^2 * ln N
    """
    if rule == "log2n":
        return lambda n, N, sigma: math.log2(n)
    kind, _, arg = rule.partition(":")
    try:
        v = float(arg)
    except ValueError:
        raise ScenarioError(f"bad lambda rule {rule!r}") from None
    if kind == "fixed":
        return lambda n, N, sigma: v
    if kind == "sigma2logN":
        return lambda n, N, sigma: v * sigma ** 2 * math.log(N)
    raise ScenarioError(f"unknown lambda rule {rule!r}")


@dataclass(frozen=True)
class Scenario:
    name: str
    sizes: tuple[int, ...]
    sigma: float
    reps: int
    lambda_rule: str = "log2n"
    order: int = 0
    family: str = RDP
    seed: int = 0

    def __post_init__(self):
        if self.name not in SCENARIOS:
            raise ScenarioError(f"unknown scenario {self.name!r}")
        if self.reps < 1:
            raise ScenarioError("reps must be >= 1")
        if list(self.sizes) != sorted(set(self.sizes)):
            raise ScenarioError("sizes must be strictly increasing")
        if self.sigma < 0:
            raise ScenarioError("sigma must be >= 0")
        parse_lambda_rule(self.lambda_rule)

    @classmethod
    def default(cls, name: str, sizes, reps: int = 20, seed: int = 0, **kw) -> "Scenario":
        if name not in SCENARIOS:
            raise ScenarioError(f"unknown scenario {name!r}")
        order, family, rule = DEFAULTS[name]
        args = dict(sigma=DEFAULT_SIGMA[name], lambda_rule=rule, order=order, family=family)
        args.update({k: v for k, v in kw.items() if v is not None})
        return cls(name, tuple(sizes), reps=reps, seed=seed, **args)

    def truth(self, n: int) -> np.ndarray:
        return TRUTHS[self.name](n)

    def lam(self, n: int) -> float:
        N = n if self.name == "pwlinear1d" else n * n
        return parse_lambda_rule(self.lambda_rule)(n, N, self.sigma)


def noise(seed: int, n: int, rep: int, shape) -> np.ndarray:
    """Standard normal noise keyed by (seed, n, rep); entry i is the i-th draw.

    Philox is counter based, so each cell's value depends only on the key and
    its flat index, never on how replicates are scheduled.
    """
    key = np.random.SeedSequence(entropy=seed, spawn_key=(n, rep))
    gen = np.random.Generator(np.random.Philox(key))
    return gen.standard_normal(int(np.prod(shape))).reshape(shape)


def replicate_data(s: Scenario, n: int, rep: int):
    theta = s.truth(n)
    return theta, theta + s.sigma * noise(s.seed, n, rep, theta.shape)


@dataclass
class MseTable:
    rows: list = field(default_factory=list)  # (n, N, mse_mean, mse_stderr)
    slope: float | None = None
    replicates: list = field(default_factory=list)  # (n, rep, mse, objective, pieces)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("n,N,mse_mean,mse_stderr\n")
        for n, N, m, se in self.rows:
            buf.write(f"{n},{N},{m:.17g},{se:.17g}\n")
        slope = "nan" if self.slope is None else f"{self.slope:.17g}"
        buf.write(f"# slope={slope}\n")
        return buf.getvalue()


def fit_slope(table: MseTable) -> float:
    """Least-squares slope of log(mse) against log(N)."""
    rows = [r for r in table.rows if r[2] > 0]
    if len(rows) < 2:
        raise ScenarioError("need at least two rows with positive mse to fit a slope")
    x = np.log([r[1] for r in rows])
    y = np.log([r[2] for r in rows])
    return float(np.polyfit(x, y, 1)[0])


def run_scenario(s: Scenario, threads: int = 1) -> MseTable:
    table = MseTable()
    for n in s.sizes:
        lam = s.lam(n)
        mses = []
        for rep in range(s.reps):
            theta, y = replicate_data(s, n, rep)
            try:
                fit = solve(y, s.order, lam, s.family, threads=threads)
            except Exception as exc:
                raise ScenarioError(f"{s.name} n={n} rep={rep}: {exc}") from exc
            err = fit.fitted.values - theta
            mse = float(np.sum(err * err) / theta.size)
            mses.append(mse)
            table.replicates.append((n, rep, mse, fit.objective, fit.pieces))
        mses = np.array(mses)
        se = float(mses.std(ddof=1) / math.sqrt(s.reps)) if s.reps > 1 else 0.0
        table.rows.append((n, theta.size, float(mses.mean()), se))
    if len(table.rows) >= 3:
        try:
            table.slope = fit_slope(table)
        except ScenarioError:
            table.slope = None
    return table

