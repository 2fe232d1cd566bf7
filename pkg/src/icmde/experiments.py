"""Named, seeded experiments: the slow-convergence construction for standard
MDL, a parametric-rate comparison of global and localized entropy, and
parameter sweeps over the bound verifier.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import bounds as bd
from . import complexity as cx
from . import divergences as dv
from .core import ModelFamily, RngSpec, as_density, log_likelihood_matrix, sample_counts, validate_family
from .errors import ConfigInfeasible, ParameterDomain
from .estimators import mdl_select, mdl_select_batch


def random_density(M: int, gen: np.random.Generator, concentration: float = 1.0) -> np.ndarray:
    p = gen.dirichlet(np.full(M, concentration))
    # Dirichlet draws can underflow to exact zeros for tiny concentrations; keep them strictly positive
    p = np.maximum(p, 1e-300)
    return p / p.sum()


def random_instance(M: int, N: int, gen: np.random.Generator, concentration: float = 1.0) -> ModelFamily:
    """Family of ``N`` Dirichlet densities on ``M`` points, Dirichlet prior, Dirichlet truth."""
    probs = np.stack([random_density(M, gen, concentration) for _ in range(N)])
    prior = random_density(N, gen)
    q = random_density(M, gen, concentration)
    return validate_family(probs, prior, truth=q)


# ---------------------------------------------------------------------------
# slow convergence of standard MDL


@dataclass(frozen=True)
class CounterexampleConfig:
    """``2m`` points, uniform truth with prior 1/4, ``2^n`` random half-support members.

    ``m`` has no default: it must satisfy ``(m - n)^n / m^n >= 1/2``.
    """

    n: int
    m: int
    replicates: int
    rng: RngSpec

    def __post_init__(self):
        if self.n < 1 or self.replicates < 1:
            raise ConfigInfeasible("n and replicates must be positive")
        if self.m < self.n:
            raise ConfigInfeasible(f"need m >= n, got m={self.m}, n={self.n}")
        if self.feasibility < 0.5:
            raise ConfigInfeasible(
                f"(m-n)^n/m^n = {self.feasibility:.4f} < 0.5; increase m (n={self.n}, m={self.m})"
            )

    @property
    def feasibility(self) -> float:
        return ((self.m - self.n) / self.m) ** self.n

    @property
    def members(self) -> int:
        return 2**self.n


@dataclass(frozen=True)
class CounterexampleReport:
    n: int
    m: int
    replicates: int
    p_correct: float
    se: float
    bound: float
    resolvability: float
    exact_probability: float
    survivor_agreement: bool
    correct: np.ndarray = field(repr=False)

    @property
    def within_bound(self) -> bool:
        return self.p_correct <= self.bound + 3 * self.se


def counterexample_prior(n: int) -> np.ndarray:
    """Truth first with prior 1/4, then ``2^n`` members with ``3/2^(n+2)`` each."""
    return np.concatenate([[0.25], np.full(2**n, 3.0 / 2 ** (n + 2))])


def _random_subsets(gen: np.random.Generator, k: int, m: int) -> np.ndarray:
    """``k`` independent uniform ``m``-subsets of ``{0..2m-1}`` by a partial Fisher-Yates shuffle."""
    size = 2 * m
    perm = np.tile(np.arange(size), (k, 1))
    rows = np.arange(k)
    for i in range(m):
        j = i + gen.integers(0, size - i, size=k)
        perm[rows, i], perm[rows, j] = perm[rows, j], perm[rows, i].copy()
    return perm[:, :m]


def counterexample_family(config: CounterexampleConfig, gen: np.random.Generator) -> ModelFamily:
    m = config.m
    subsets = _random_subsets(gen, config.members, m)
    probs = np.zeros((config.members + 1, 2 * m))
    probs[0] = 1.0 / (2 * m)
    rows = np.repeat(np.arange(1, config.members + 1), m)
    probs[rows, subsets.reshape(-1)] = 1.0 / m
    ids = ["q"] + [f"p{j}" for j in range(1, config.members + 1)]
    return validate_family(probs, counterexample_prior(config.n), ids=ids, truth=probs[0])


def run_counterexample(config: CounterexampleConfig) -> CounterexampleReport:
    """Estimate the probability that standard MDL (``lam = 1``) recovers the truth.

    Each replicate ``r`` draws a fresh family and a fresh dataset from
    stream ``r``.  The truth is selected iff no random member survives,
    i.e. every member gives zero mass to some observed point; this event is
    tracked separately and must coincide with the MDL decision.
    """
    n, m = config.n, config.m
    correct = np.empty(config.replicates, dtype=bool)
    agree = True
    resolv = None
    for r in range(config.replicates):
        gen = config.rng.generator(r)
        fam = counterexample_family(config, gen)
        data = gen.integers(0, 2 * m, size=n)
        k = mdl_select(fam, data, 1.0)
        correct[r] = k == 0
        survivors = np.all(fam.probs[1:, data] > 0, axis=1)
        agree &= bool(correct[r] == (not survivors.any()))
        if resolv is None:
            resolv = cx.index_of_resolvability(fam, fam.truth, 1.0, n)
    p = float(correct.mean())
    se = math.sqrt(max(p * (1 - p), 1e-300) / config.replicates)
    bound = math.exp(-0.5)
    return CounterexampleReport(
        n=n,
        m=m,
        replicates=config.replicates,
        p_correct=p,
        se=se,
        bound=bound,
        resolvability=float(resolv),
        exact_probability=counterexample_exact_probability(n, m),
        survivor_agreement=agree,
        correct=correct,
    )


def _stirling2(n: int, k: int) -> int:
    s = [[0] * (k + 1) for _ in range(n + 1)]
    s[0][0] = 1
    for i in range(1, n + 1):
        for j in range(1, min(i, k) + 1):
            s[i][j] = j * s[i - 1][j] + s[i - 1][j - 1]
    return s[n][k]


def counterexample_exact_probability(n: int, m: int) -> float:
    """``E_X (1 - C(2m-|X|, m)/C(2m, m))^(2^n)`` with ``|X|`` the number of distinct draws.

    ``P(|X| = k) = C(2m, k) S(n, k) k! / (2m)^n`` with Stirling numbers of the
    second kind; the inner ratio is the chance that one random member
    contains all observed points.
    """
    total = Fraction(0)
    space = 2 * m
    denom = math.comb(space, m)
    for k in range(1, n + 1):
        pk = Fraction(math.comb(space, k) * _stirling2(n, k) * math.factorial(k), space**n)
        miss = 1 - Fraction(math.comb(space - k, m), denom)
        total += pk * miss ** (2**n)
    return float(total)


# ---------------------------------------------------------------------------
# parametric rate: global vs localized entropy on a Bernoulli net


def bernoulli_net(N: int, theta: float = 0.5) -> tuple[ModelFamily, int]:
    """Models ``(t, 1-t)`` at ``t = j/N`` with a uniform prior; truth snapped to the grid point nearest ``theta``."""
    if N < 1:
        raise ParameterDomain("net size N must be >= 1")
    if not 0 < theta < 1:
        raise ParameterDomain("truth parameter must lie in (0, 1)")
    t = np.arange(N + 1) / N
    probs = np.column_stack([t, 1 - t])
    k = int(np.clip(round(theta * N), 1, N - 1)) if N > 1 else int(round(theta * N))
    prior = np.full(N + 1, 1.0 / (N + 1))
    return validate_family(probs, prior, truth=probs[k]), k


@dataclass(frozen=True)
class RateRow:
    n: int
    N: int
    global_entropy: float
    localized_entropy: float
    mdl_risk: float
    mdl_risk_se: float
    c1: float
    c2: float


@dataclass(frozen=True)
class RateReport:
    rows: tuple[RateRow, ...]
    localized_ratio: float
    global_increase: float

    @property
    def localized_bounded(self) -> bool:
        return self.localized_ratio <= 1.5

    @property
    def global_grows(self) -> bool:
        return self.global_increase > math.log(2)


def curvature_constants(family: ModelFamily, k: int, rho: float = 0.5) -> tuple[float, float]:
    """Smallest and largest ratio of divergence to ``(theta - theta_k)^2`` over interior net points.

    Both the scaled Renyi divergence and KL enter; the interval ``[c1, c2]``
    must bracket every ratio.
    """
    q = family.probs[k]
    theta = family.probs[:, 0]
    interior = (theta > 0) & (theta < 1) & (np.arange(family.size) != k)
    if not interior.any():
        return float("nan"), float("nan")
    sq = (theta[interior] - theta[k]) ** 2
    ratios = np.concatenate([
        np.asarray(dv.renyi_divergence(q, family.probs[interior], rho)) / sq,
        np.asarray(dv.kl(q, family.probs[interior])) / sq,
    ])
    return float(ratios.min()), float(ratios.max())


def run_parametric_rate_demo(
    ns, rng: RngSpec, replicates: int = 200, theta: float = 0.5, rho: float = 0.5, lam: float = 2.0, shrink: float = 0.5
) -> RateReport:
    """Global entropy ``ln(N+1)`` against the localized entropy for ``N = ceil(sqrt(n))``.

    The MDL risk column is a Monte Carlo estimate of ``E D^Re_rho(q || p_khat)``
    at penalty ``lam``; grid point ``i`` uses replicate streams ``(i, r)``.
    """
    rows = []
    for i, n in enumerate(ns):
        n = int(n)
        N = math.ceil(math.sqrt(n))
        fam, k = bernoulli_net(N, theta)
        q = fam.truth
        loc = cx.localized_entropy_term(fam, q, rho, n, k, shrink)
        counts = sample_counts(q, n, replicates, rng, key=(i,))
        khat = mdl_select_batch(fam, log_likelihood_matrix(fam, counts), lam)
        d = np.asarray(dv.renyi_divergence(q, fam.probs, rho))[khat]
        c1, c2 = curvature_constants(fam, k, rho)
        rows.append(
            RateRow(n, N, math.log(N + 1), loc, float(d.mean()), float(d.std(ddof=1) / math.sqrt(replicates)), c1, c2)
        )
    locs = [r.localized_entropy for r in rows]
    globs = [r.global_entropy for r in rows]
    ratio = max(locs) / min(locs) if rows else float("nan")
    return RateReport(tuple(rows), ratio, (max(globs) - min(globs)) if rows else 0.0)


# ---------------------------------------------------------------------------
# sweeps

GRID_KEYS = ("n", "lambda", "rho", "gamma", "alpha", "beta", "t", "delta")
_SPEC_FIELD = {"n": "n", "lambda": "lam", "rho": "rho", "gamma": "gamma", "alpha": "alpha", "beta": "beta", "t": "t", "delta": "delta"}


def grid_points(grid: dict) -> list[dict]:
    """Cartesian product in the fixed key order ``n, lambda, rho, gamma, alpha, beta, t, delta``."""
    unknown = set(grid) - set(GRID_KEYS)
    if unknown:
        raise ParameterDomain(f"unknown grid keys {sorted(unknown)}; allowed: {', '.join(GRID_KEYS)}")
    keys = [k for k in GRID_KEYS if k in grid]
    values = [list(grid[k]) if isinstance(grid[k], (list, tuple)) else [grid[k]] for k in keys]
    if not keys or any(len(v) == 0 for v in values):
        return []
    if "n" not in keys:
        raise ParameterDomain("a non-empty grid needs an 'n' entry")
    return [dict(zip(keys, combo)) for combo in itertools.product(*values)]


def run_sweep(
    family: ModelFamily,
    q,
    bound_ids,
    grid: dict,
    rng: RngSpec,
    replicates: int = 1000,
    mode: str = "auto",
    cover: cx.FamilyCover | None = None,
) -> list[bd.BoundReport]:
    """One report per (bound id, grid point); bound ids vary slowest.

    Every grid point reuses the same seeded datasets for a given ``n``, so a
    one-point sweep reproduces a direct :func:`~icmde.bounds.verify` call.
    """
    if q is None:
        q = family.truth
    q = as_density(q, family.space_size)
    points = grid_points(grid)
    out = []
    for b in bound_ids:
        for pt in points:
            kwargs = {_SPEC_FIELD[k]: v for k, v in pt.items()}
            kwargs["n"] = int(kwargs["n"])
            spec = bd.BoundSpec(b, cover=cover, **kwargs)
            out.append(bd.verify(spec, family, q, replicates, rng, mode))
    return out


__all__ = [
    "CounterexampleConfig",
    "CounterexampleReport",
    "RateReport",
    "RateRow",
    "bernoulli_net",
    "counterexample_exact_probability",
    "counterexample_family",
    "counterexample_prior",
    "curvature_constants",
    "grid_points",
    "random_density",
    "random_instance",
    "run_counterexample",
    "run_parametric_rate_demo",
    "run_sweep",
]
