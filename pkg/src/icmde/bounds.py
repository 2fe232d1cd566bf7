"""Right-hand sides of the risk bounds and an engine that checks them.

Every bound compares an expectation over datasets ``X ~ q^n`` (the left-hand
side) with a closed-form quantity.  :func:`verify` evaluates the expectation
exactly by summing over all count vectors when ``M^n`` is small and by seeded
Monte Carlo otherwise, then renders a verdict:

* exact mode: ``violated`` iff ``slack < -1e-9``;
* Monte Carlo: ``violated`` iff ``slack < -3 SE``, ``holds-within-noise`` iff
  ``-3 SE <= slack < 0``.

In each report ``lhs`` is the side claimed to be smaller and ``rhs`` the side
claimed to be larger, so ``slack = rhs - lhs >= 0`` means the bound holds.
When the right-hand side itself contains a data-dependent term it is
estimated from the same datasets, and ``lhs_se`` is the standard error of
the paired difference.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
from scipy.special import gammaln, logsumexp

from . import complexity as cx
from . import divergences as dv
from . import hull
from .core import ModelFamily, RngSpec, as_density, kl_entropy, log_likelihood_matrix, sample_counts
from .errors import NotAPartition, ParameterDomain, ProductSpaceTooLarge
from .estimators import (
    FULL_SIMPLEX,
    POINT_MASSES,
    empirical_risk_batch,
    icm_batch,
    point_mass,
)

EXACT = "exact"
MONTE_CARLO = "monte-carlo"
EXACT_CAP = 10**5
EXACT_TOL = 1e-9
Z_NOISE = 3.0

HOLDS = "holds"
HOLDS_NOISE = "holds-within-noise"
VIOLATED = "violated"

# stream key for auxiliary draws (random test functions), disjoint from replicate keys
AUX_KEY = 2**32

BOUND_IDS = (
    "thm2.1-prob",
    "thm2.1-exp",
    "lemma2.1",
    "thm3.1",
    "cor3.1",
    "cor3.2",
    "thm4.1",
    "thm5.1",
    "thm4.2",
    "thm4.3",
    "cor3.3",
    "thm5.2",
    "thm3.2",
    "thm4.4",
    "cor5.1",
    "thm5.3",
    "lemmaA.1",
    "lemmaA.2",
)

_ESTIMATOR_ALIASES = {"mdl": POINT_MASSES, "gibbs": FULL_SIMPLEX, POINT_MASSES: POINT_MASSES, FULL_SIMPLEX: FULL_SIMPLEX}


def _feasible(estimator: str) -> str:
    try:
        return _ESTIMATOR_ALIASES[estimator]
    except KeyError:
        raise ParameterDomain(f"unknown estimator {estimator!r}; use 'mdl' or 'gibbs'") from None


@dataclass(frozen=True)
class BoundSpec:
    """Which bound to check and with which parameters.

    Parameters left as ``None`` take the value the bound's statement fixes
    (e.g. ``rho = 1/lam`` for ``cor3.1`` and ``thm4.2``, ``lam = 1`` for the
    standard-MDL and standard-Bayes bounds) or a conventional default.
    For the ``lemmaA.*`` ids the lemma's ``lambda'`` is ``lambda_prime``,
    falling back to ``lam``.
    """

    bound: str
    n: int
    lam: float | None = None
    rho: float | None = None
    gamma: float | None = None
    alpha: float = 1.0
    beta: float = 1.0
    t: float = 1.0
    delta: float = 0.2
    lambda_prime: float | None = None
    shrink: float = 0.5
    feasible_set: str | None = None
    cover: cx.FamilyCover | None = None
    f: np.ndarray | None = field(default=None, repr=False)
    n_random_f: int = 50

    def __post_init__(self):
        if self.bound not in BOUND_IDS:
            raise ParameterDomain(f"unknown bound id {self.bound!r}; expected one of {', '.join(BOUND_IDS)}")
        if int(self.n) < 1:
            raise ParameterDomain(f"n must be >= 1, got {self.n}")


@dataclass(frozen=True)
class BoundReport:
    bound: str
    mode: str
    n: int
    lam: float | None
    rho: float | None
    gamma: float | None
    alpha: float | None
    t: float | None
    delta: float | None
    lhs: float
    lhs_se: float
    rhs: float
    slack: float
    replicates: int
    verdict: str
    extra: dict[str, Any] = field(default_factory=dict, repr=False, compare=False)

    @property
    def ok(self) -> bool:
        return self.verdict != VIOLATED


# ---------------------------------------------------------------------------
# right-hand sides


def model_resolvability(family: ModelFamily, q, lam: float, n: int, estimator: str) -> float:
    """``inf_{w in S} R_lam(w)``: index of resolvability over point masses, Bayesian resolvability over the simplex."""
    if _feasible(estimator) == POINT_MASSES:
        return cx.index_of_resolvability(family, q, lam, n)
    return cx.bayesian_resolvability(family, q, lam, n)[0]


def _check_global(lam: float, rho: float):
    if not lam > 1:
        raise ParameterDomain(f"lambda must exceed 1, got {lam}")
    if not 0 < rho <= 1.0 / lam * (1 + 1e-12):
        raise ParameterDomain(f"rho must lie in (0, 1/lambda] = (0, {1 / lam:.6g}], got {rho}")


def rhs_global(family: ModelFamily, q, lam: float, rho: float, n: int, estimator: str = "gibbs") -> float:
    """``resolvability / (rho (lam - 1))`` for ``lam > 1`` and ``0 < rho <= 1/lam``."""
    _check_global(lam, rho)
    return model_resolvability(family, q, lam, n, estimator) / (rho * (lam - 1.0))


def rhs_localized(family: ModelFamily, q, lam: float, n: int, shrink: float = 0.5, global_entropy: bool = False) -> float:
    """``(2/(1-rho)) min_k [KL(q||p_k) + (lam/n) * localized entropy of k]`` with ``rho = 1/lam``.

    With ``global_entropy=True`` the localized term is replaced by
    ``ln(1/pi_k)``, giving the matching bound without localization.
    """
    if not lam > 1:
        raise ParameterDomain(f"lambda must exceed 1, got {lam}")
    if n < 1:
        raise ParameterDomain(f"n must be >= 1, got {n}")
    rho = 1.0 / lam
    d = np.asarray(dv.kl(q, family.probs)).reshape(-1)
    if global_entropy:
        ent = -family.log_prior
    else:
        # the localized entropy of k is a common log-normalizer minus ln pi_k
        log_z = cx.localized_entropy_term(family, q, rho, n, 0, shrink) + family.log_prior[0]
        ent = log_z - family.log_prior
    return float(2.0 / (1.0 - rho) * np.min(d + lam / n * ent))


def rhs_lambda_one(family: ModelFamily, q, rho: float, gamma: float, n: int, cover: cx.FamilyCover | None = None, estimator: str = "gibbs") -> float:
    """Standard-MDL / standard-Bayes bound for ``lam = 1`` and ``gamma >= 1``.

    ``gamma * resolvability / (rho(1-rho)) + (gamma-rho)/(rho(1-rho)n) * cover term``
    with the cover term at exponent ``s = (gamma-1)/(gamma-rho)``.  The
    default cover is the singleton partition.
    """
    rho = dv.check_rho(rho)
    if not gamma >= 1:
        raise ParameterDomain(f"gamma must be >= 1, got {gamma}")
    if cover is None:
        cover = cx.FamilyCover.singletons(family.size)
    s = (gamma - 1.0) / (gamma - rho)
    scale = rho * (1.0 - rho)
    first = gamma * model_resolvability(family, q, 1.0, n, estimator) / scale
    return first + (gamma - rho) / (scale * n) * cx.cover_complexity_term(family, cover, s, n)


def weak_convergence_level(family: ModelFamily, q, n: int, estimator: str = "gibbs") -> float:
    """``A_n = inf_{w in S} R_1(w) + ln 2 / n``."""
    return model_resolvability(family, q, 1.0, n, estimator) + np.log(2.0) / n


def rhs_weak(family: ModelFamily, q, n: int, estimator: str = "gibbs") -> float:
    """``2 A_n + sqrt(2 A_n)``; always positive."""
    a = weak_convergence_level(family, q, n, estimator)
    return float(2 * a + np.sqrt(2 * a))


def rhs_tail(family: ModelFamily, q, lam: float, rho: float, n: int, t: float, delta: float) -> tuple[float, float]:
    """Concentration radius ``(4 eps_pi + 2t)/(rho(lam-1)delta)`` and tail level ``1/(1+e^{nt/lam})``."""
    _check_global(lam, rho)
    if not t >= 0:
        raise ParameterDomain(f"t must be nonnegative, got {t}")
    if not 0 < delta < 1:
        raise ParameterDomain(f"delta must lie in (0, 1), got {delta}")
    eps = cx.critical_prior_mass_radius(family, q, lam, n).value
    radius = (4 * eps + 2 * t) / (rho * (lam - 1.0) * delta)
    # 1/(1+e^z) = expit(-z), computed without overflow
    tail = float(np.exp(-np.logaddexp(0.0, n * t / lam)))
    return float(radius), tail


def rhs_partition(family: ModelFamily, q, rho: float, gamma: float, n: int, partition: cx.FamilyCover) -> float:
    """Partition bound with hull-wide supremal KL per block."""
    rho = dv.check_rho(rho)
    if not gamma >= 1:
        raise ParameterDomain(f"gamma must be >= 1, got {gamma}")
    if not partition.is_partition:
        raise NotAPartition("blocks of the cover overlap")
    q = as_density(q, family.space_size)
    log_mass = np.log(partition.block_priors(family.prior))
    sup_kl = np.array([hull.sup_kl_over_hull(q, family.probs[list(b)]) for b in partition.blocks])
    s = (gamma - 1.0) / (gamma - rho)
    first = (gamma - rho) * logsumexp(s * log_mass)
    second = gamma * logsumexp(np.where(np.isinf(sup_kl), -np.inf, log_mass - n * sup_kl))
    return float((first - second) / (rho * (1.0 - rho) * n))


def risk_lower_bound(family: ModelFamily, q, lam_prime: float, n: int) -> float:
    """``-(lam'/n) ln E_pi (E_q (p/q)^{1/lam'})^n``; nonnegative for ``lam' >= 1``."""
    if not lam_prime >= 1:
        raise ParameterDomain(f"lambda' must be >= 1, got {lam_prime}")
    a = np.asarray(dv.power_mean(q, family.probs, 1.0 / lam_prime)).reshape(-1)
    with np.errstate(divide="ignore"):
        return float(-(lam_prime / n) * logsumexp(family.log_prior + n * np.log(a)))


def cover_risk_lower_bound(family: ModelFamily, q, lam_prime: float, n: int, cover: cx.FamilyCover) -> float:
    """``-(1/n) ln sum_j pi(G_j)^{lam'} (1 + r_ub(G_j))^n`` for ``0 <= lam' <= 1``."""
    if not 0 <= lam_prime <= 1:
        raise ParameterDomain(f"lambda' must lie in [0, 1], got {lam_prime}")
    return -cx.cover_complexity_term(family, cover, lam_prime, n) / n


# ---------------------------------------------------------------------------
# datasets


@dataclass(frozen=True)
class DatasetEnsemble:
    """Count vectors with probabilities (exact) or equal weights (Monte Carlo)."""

    counts: np.ndarray
    weights: np.ndarray | None
    mode: str

    @property
    def size(self) -> int:
        return self.counts.shape[0]

    def mean_se(self, values) -> tuple[float, float]:
        v = np.asarray(values, dtype=float)
        if self.mode == EXACT:
            return float(np.dot(self.weights, v)), 0.0
        if not np.all(np.isfinite(v)):
            return float(np.mean(v)), np.inf
        return float(np.mean(v)), float(np.std(v, ddof=1) / np.sqrt(v.size))


def count_vectors(n: int, M: int) -> np.ndarray:
    """All length-``M`` nonnegative integer vectors summing to ``n`` (stars and bars)."""
    if M == 1:
        return np.array([[n]], dtype=np.int64)
    bars = np.array(list(itertools.combinations(range(n + M - 1), M - 1)), dtype=np.int64).reshape(-1, M - 1)
    edges = np.hstack([np.full((bars.shape[0], 1), -1), bars, np.full((bars.shape[0], 1), n + M - 1)])
    return np.diff(edges, axis=1) - 1


def exact_ensemble(q, n: int) -> DatasetEnsemble:
    """Every dataset of size ``n`` up to order, weighted by its multinomial probability."""
    q = as_density(q)
    M = q.size
    if M**n > EXACT_CAP:
        raise ProductSpaceTooLarge(f"{M}^{n} datasets exceed the exact-enumeration cap {EXACT_CAP}")
    c = count_vectors(n, M)
    possible = ~np.any((c > 0) & (q == 0), axis=1)
    c = c[possible]
    with np.errstate(divide="ignore"):
        logq = np.where(q > 0, np.log(q), 0.0)
    logw = gammaln(n + 1) - gammaln(c + 1).sum(axis=1) + c @ logq
    return DatasetEnsemble(c, np.exp(logw), EXACT)


def mc_ensemble(q, n: int, replicates: int, rng: RngSpec) -> DatasetEnsemble:
    if replicates < 2:
        raise ParameterDomain("Monte Carlo mode needs at least 2 replicates")
    if rng is None:
        raise ParameterDomain("Monte Carlo mode needs an RngSpec")
    return DatasetEnsemble(sample_counts(q, n, replicates, rng), None, MONTE_CARLO)


def make_ensemble(q, n: int, replicates: int, rng: RngSpec | None, mode: str = "auto") -> DatasetEnsemble:
    q = as_density(q)
    if mode == "auto":
        mode = EXACT if q.size**n <= EXACT_CAP else MONTE_CARLO
    if mode == EXACT:
        return exact_ensemble(q, n)
    if mode in (MONTE_CARLO, "mc"):
        return mc_ensemble(q, n, replicates, rng)
    raise ParameterDomain(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# verification


def verdict(slack: float, se: float, mode: str) -> str:
    if mode == EXACT:
        return VIOLATED if slack < -EXACT_TOL else HOLDS
    if slack >= 0:
        return HOLDS
    return HOLDS_NOISE if slack >= -Z_NOISE * se else VIOLATED


_DEFAULT_FEASIBLE = {
    "thm4.1": POINT_MASSES,
    "thm4.2": POINT_MASSES,
    "thm4.3": POINT_MASSES,
    "thm4.4": POINT_MASSES,
    "thm5.1": FULL_SIMPLEX,
    "thm5.2": FULL_SIMPLEX,
    "thm5.3": FULL_SIMPLEX,
    "cor5.1": FULL_SIMPLEX,
}
_LAMBDA_ONE = {"thm4.3", "cor3.3", "thm5.2", "thm3.2", "thm4.4", "thm5.3"}
_GLOBAL = {"cor3.2", "thm4.1", "thm5.1"}


def resolve(spec: BoundSpec) -> BoundSpec:
    """Fill in parameters fixed by the bound and validate their domains."""
    b = spec.bound
    fixed = _DEFAULT_FEASIBLE.get(b)
    fs = spec.feasible_set if spec.feasible_set is not None else (fixed or FULL_SIMPLEX)
    fs = _feasible(fs)
    if fixed is not None and fs != fixed:
        raise ParameterDomain(f"{b} is stated for the {fixed} estimator")
    lam = spec.lam
    rho = spec.rho
    gamma = spec.gamma

    if b in _LAMBDA_ONE:
        if lam is not None and lam != 1:
            raise ParameterDomain(f"{b} requires lambda = 1")
        lam = 1.0
        if b not in ("thm3.2", "thm4.4"):
            rho = dv.check_rho(0.5 if rho is None else rho)
            gamma = 1.0 if gamma is None else float(gamma)
            if not gamma >= 1:
                raise ParameterDomain(f"{b} requires gamma >= 1, got {gamma}")
    elif b.startswith("lemmaA"):
        lp = spec.lambda_prime if spec.lambda_prime is not None else (1.0 if lam is None else lam)
        if b == "lemmaA.1" and not lp >= 1:
            raise ParameterDomain(f"lemmaA.1 requires lambda' >= 1, got {lp}")
        if b == "lemmaA.2" and not 0 <= lp <= 1:
            raise ParameterDomain(f"lemmaA.2 requires lambda' in [0, 1], got {lp}")
        return replace(spec, lam=float(lp), lambda_prime=float(lp), feasible_set=fs)
    else:
        lam = 2.0 if lam is None else float(lam)
        if not lam > 0:
            raise ParameterDomain(f"lambda must be positive, got {lam}")
        if b in ("cor3.1", "thm4.2"):
            if not lam > 1:
                raise ParameterDomain(f"{b} requires lambda > 1")
            if rho is not None and abs(rho - 1.0 / lam) > 1e-12:
                raise ParameterDomain(f"{b} fixes rho = 1/lambda")
            rho = 1.0 / lam
        elif b in _GLOBAL or b == "cor5.1":
            rho = 1.0 / lam if rho is None else float(rho)
            _check_global(lam, rho)
        elif b == "thm3.1":
            rho = dv.check_rho(0.5 if rho is None else rho)
            if gamma is None:
                gamma = (1.0 - rho) / (lam - 1.0) if lam > 1 else 1.0
            if not spec.alpha > 0:
                raise ParameterDomain("thm3.1 requires alpha > 0")
            if gamma < rho:
                raise ParameterDomain(f"thm3.1 requires gamma >= rho, got gamma={gamma}, rho={rho}")
            if gamma == rho:
                if abs(lam * gamma - 1) > 1e-12:
                    raise ParameterDomain("thm3.1 with gamma = rho requires lambda * gamma = 1")
            elif (lam * gamma - 1) / (gamma - rho) < 0:
                raise ParameterDomain("thm3.1 requires lambda' = (lambda gamma - 1)/(gamma - rho) >= 0")
        else:  # thm2.1-*, lemma2.1
            rho = dv.check_rho(0.5 if rho is None else rho)
    if b == "cor5.1":
        if not spec.t >= 0:
            raise ParameterDomain("cor5.1 requires t >= 0")
        if not 0 < spec.delta < 1:
            raise ParameterDomain("cor5.1 requires delta in (0, 1)")
    return replace(spec, lam=lam, rho=rho, gamma=gamma, feasible_set=fs)


def _estimator_weights(family: ModelFamily, L: np.ndarray, lam: float, fs: str) -> np.ndarray:
    """ICM weights; ``lam = 0`` means the unpenalized empirical-risk minimizer."""
    if lam == 0:
        return point_mass(family.size, np.argmax(L, axis=1))
    return icm_batch(family, L, lam, fs)


def _weighted_sum(mu: np.ndarray, values) -> np.ndarray:
    v = np.broadcast_to(np.asarray(values, dtype=float), mu.shape)
    with np.errstate(invalid="ignore"):
        return np.where(mu > 0, mu * v, 0.0).sum(axis=1)


def _test_functions(spec: BoundSpec, M: int, rng: RngSpec | None) -> np.ndarray:
    if spec.f is not None:
        f = np.atleast_2d(np.asarray(spec.f, dtype=float))
        if f.shape[1] != M or np.any(np.abs(f) > 1):
            raise ParameterDomain(f"test functions must have {M} entries in [-1, 1]")
        return f
    if rng is None:
        raise ParameterDomain("random test functions need an RngSpec (or pass f explicitly)")
    rand = rng.generator(AUX_KEY).uniform(-1.0, 1.0, size=(spec.n_random_f, M))
    if M <= 10:
        signs = np.array(list(itertools.product((-1.0, 1.0), repeat=M)))
    else:
        ind = 2.0 * np.eye(M) - 1.0
        signs = np.vstack([ind, -ind])
    return np.vstack([rand, signs])


def _report(spec: BoundSpec, ens: DatasetEnsemble, lhs: float, se: float, rhs: float, slack: float | None = None, force_violation: bool = False, **extra) -> BoundReport:
    if slack is None:
        slack = rhs - lhs
    v = verdict(slack, se, ens.mode)
    if force_violation:
        v = VIOLATED
    used_gamma = spec.gamma if spec.bound in ("thm3.1",) or spec.bound in _LAMBDA_ONE - {"thm3.2", "thm4.4"} else None
    return BoundReport(
        bound=spec.bound,
        mode=ens.mode,
        n=int(spec.n),
        lam=spec.lam,
        rho=spec.rho,
        gamma=used_gamma,
        alpha=spec.alpha if spec.bound in ("thm3.1", "thm2.1-prob", "thm2.1-exp", "lemma2.1") else None,
        t=spec.t if spec.bound in ("thm2.1-prob", "cor5.1") else None,
        delta=spec.delta if spec.bound == "cor5.1" else None,
        lhs=float(lhs),
        lhs_se=float(se),
        rhs=float(rhs),
        slack=float(slack),
        replicates=ens.size,
        verdict=v,
        extra=extra,
    )


def verify(
    spec: BoundSpec,
    family: ModelFamily,
    q=None,
    replicates: int = 1000,
    rng: RngSpec | None = None,
    mode: str = "auto",
    ensemble: DatasetEnsemble | None = None,
) -> BoundReport:
    """Check one bound on one family.

    Parameters
    ----------
    spec : BoundSpec
    family : ModelFamily
    q : density, optional
        True density; defaults to ``family.truth``.
    replicates : int
        Datasets drawn in Monte Carlo mode.
    rng : RngSpec
        Required for Monte Carlo mode and for random test functions.
    mode : {"auto", "exact", "monte-carlo"}
        ``auto`` enumerates exactly when ``M^n <= 1e5``.
    ensemble : DatasetEnsemble, optional
        Reuse datasets across several checks (must match ``q`` and ``n``).
    """
    if q is None:
        q = family.truth
    if q is None:
        raise ParameterDomain("a true density q is required for verification")
    q = as_density(q, family.space_size)
    spec = resolve(spec)
    n = int(spec.n)
    ens = ensemble if ensemble is not None else make_ensemble(q, n, replicates, rng, mode)
    counts = ens.counts
    L = log_likelihood_matrix(family, counts)
    b = spec.bound
    fs = spec.feasible_set

    if b.startswith("lemmaA"):
        lp = spec.lambda_prime
        mu = _estimator_weights(family, L, lp, fs)
        rhat = empirical_risk_batch(family, counts, mu, q, lp)
        mean, se = ens.mean_se(rhat)
        if b == "lemmaA.1":
            lower = risk_lower_bound(family, q, lp, n)
            return _report(spec, ens, lower, se, mean, force_violation=lower < -1e-12, lower_bound=lower)
        cover = spec.cover if spec.cover is not None else cx.FamilyCover.singletons(family.size)
        lower = cover_risk_lower_bound(family, q, lp, n, cover)
        return _report(spec, ens, lower, se, mean, lower_bound=lower)

    lam, rho = spec.lam, spec.rho
    mu = _estimator_weights(family, L, lam, fs)
    est = "mdl" if fs == POINT_MASSES else "gibbs"

    if b in ("thm2.1-prob", "thm2.1-exp", "lemma2.1"):
        loss = cx.log_ratio_loss(family, q, scale=rho)
        cn = cx.c_n_general(family, q, loss, n, spec.alpha, spec.beta)
        lmgf = cx.log_mgf_q(q, loss, spec.beta)
        with np.errstate(divide="ignore"):
            logq = np.where(q > 0, np.log(q), 0.0)
        Lq = counts @ logq
        with np.errstate(invalid="ignore"):
            per_model = -rho * (Lq[:, None] - L)
            if spec.alpha != 0:
                per_model = per_model - n * spec.alpha * lmgf[None, :]
        lhat = _weighted_sum(mu, per_model) - kl_entropy(mu, family.prior)
        if b == "thm2.1-prob":
            hit = (lhat > spec.t + n * cn).astype(float)
            p, _ = ens.mean_se(hit)
            bound = float(np.exp(-spec.t))
            se = 0.0 if ens.mode == EXACT else float(np.sqrt(bound * (1 - bound) / ens.size))
            return _report(spec, ens, p, se, bound, c_n=cn)
        if b == "thm2.1-exp":
            m, se = ens.mean_se(lhat / n)
            return _report(spec, ens, m, se, cn, c_n=cn)
        m, se = ens.mean_se(np.exp(lhat))
        return _report(spec, ens, m, se, float(np.exp(n * cn)), c_n=cn)

    d_re = np.asarray(dv.renyi_divergence(q, family.probs, rho)).reshape(-1) if rho is not None else None

    if b == "thm3.1":
        gamma, alpha = spec.gamma, spec.alpha
        lhs_s = _weighted_sum(mu, d_re)
        scale = alpha * rho * (1 - rho)
        if gamma == rho:
            lp, coef = 0.0, 0.0
        else:
            lp = (lam * gamma - 1.0) / (gamma - rho)
            coef = (gamma - rho) / scale
        const = (gamma * model_resolvability(family, q, lam, n, est) + cx.c_rho_n_alpha(family, q, rho, n, alpha)) / scale
        rhat = empirical_risk_batch(family, counts, mu, q, lp) if coef else np.zeros(ens.size)
        diff_mean, diff_se = ens.mean_se(lhs_s + coef * rhat)
        lhs, _ = ens.mean_se(lhs_s)
        rhat_mean, _ = ens.mean_se(rhat)
        rhs = const - coef * rhat_mean
        return _report(spec, ens, lhs, diff_se, rhs, slack=const - diff_mean, lambda_prime=lp)

    if b in ("cor3.1",) or b in _GLOBAL or b == "thm4.2":
        lhs, se = ens.mean_se(_weighted_sum(mu, d_re))
        if b == "cor3.1":
            rhs = model_resolvability(family, q, lam, n, est) / (1 - rho)
        elif b == "thm4.2":
            rhs = rhs_localized(family, q, lam, n, spec.shrink)
        else:
            rhs = rhs_global(family, q, lam, rho, n, est)
        return _report(spec, ens, lhs, se, rhs)

    if b in ("thm4.3", "cor3.3", "thm5.2"):
        cover = None if b == "thm4.3" else spec.cover
        lhs, se = ens.mean_se(_weighted_sum(mu, d_re))
        rhs = rhs_lambda_one(family, q, rho, spec.gamma, n, cover, est)
        return _report(spec, ens, lhs, se, rhs)

    if b in ("thm3.2", "thm4.4"):
        f = _test_functions(spec, family.space_size, rng)
        model_means = family.probs @ f.T  # (N, F)
        post = mu @ model_means  # (S, F)
        emp = counts @ f.T / n
        dev = np.abs(post - emp)
        rhs = rhs_weak(family, q, n, est)
        stats = [ens.mean_se(dev[:, i]) for i in range(f.shape[0])]
        key = [rhs - m + Z_NOISE * s for m, s in stats]
        worst = int(np.argmin(key))
        m, s = stats[worst]
        return _report(spec, ens, m, s, rhs, worst_f=f[worst].copy(), n_functions=f.shape[0])

    if b == "cor5.1":
        radius, tail = rhs_tail(family, q, lam, rho, n, spec.t, spec.delta)
        far = d_re >= radius
        tail_mass = mu @ far.astype(float)
        hit = (tail_mass > tail).astype(float)
        p, _ = ens.mean_se(hit)
        bound = spec.delta
        se = 0.0 if ens.mode == EXACT else float(np.sqrt(bound * (1 - bound) / ens.size))
        return _report(spec, ens, p, se, bound, radius=radius, tail_bound=tail)

    if b == "thm5.3":
        part = spec.cover if spec.cover is not None else cx.FamilyCover.singletons(family.size)
        if not part.is_partition:
            raise NotAPartition("thm5.3 needs disjoint blocks")
        inf_co = np.array([hull.inf_renyi_over_hull(q, family.probs[list(blk)], rho) for blk in part.blocks])
        member = np.zeros((family.size, len(part.blocks)))
        for j, blk in enumerate(part.blocks):
            member[list(blk), j] = 1.0
        block_post = mu @ member
        lhs, se = ens.mean_se(_weighted_sum(block_post, inf_co))
        rhs = rhs_partition(family, q, rho, spec.gamma, n, part)
        return _report(spec, ens, lhs, se, rhs)

    raise ParameterDomain(f"unhandled bound id {b!r}")  # pragma: no cover


def verify_risk_lower_bound(family: ModelFamily, q, lam_prime: float, n: int, mode: str = "auto", replicates: int = 1000, rng: RngSpec | None = None) -> BoundReport:
    """Check ``E R_hat_{lam'}(w) >= -(lam'/n) ln E_pi E_q^n (p/q)^{1/lam'} >= 0``.

    ``w`` is the Gibbs posterior at temperature ``lam'``, which minimizes
    the regularized empirical risk, so the check covers every estimator.
    """
    return verify(BoundSpec("lemmaA.1", n, lambda_prime=lam_prime), family, q, replicates, rng, mode)
