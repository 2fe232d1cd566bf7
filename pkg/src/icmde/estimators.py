"""Information complexity minimization over a finite model family.

Two feasible sets are supported: the full probability simplex, whose minimizer
is the Gibbs (tempered Bayesian) posterior with temperature ``1/lambda``, and
the set of point masses, whose minimizer is the two-part-code MDL choice.

Most functions come in two flavours: a single-dataset version taking raw
sample indices and a ``*_batch`` version taking a matrix of log-likelihoods
(one row per dataset) for the verification engine.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from . import divergences as dv
from .core import (
    ModelFamily,
    as_dataset,
    as_density,
    counts_of,
    kl_entropy,
    log_likelihood_matrix,
)
from .errors import AllModelsZeroLikelihood, ParameterDomain, ShapeMismatch

FULL_SIMPLEX = "full_simplex"
POINT_MASSES = "point_masses"
FEASIBLE_SETS = (FULL_SIMPLEX, POINT_MASSES)


def _scalar(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not value > 0:
        raise ParameterDomain(f"{name} must be positive, got {value}")
    return value


def gibbs_posterior_batch(family: ModelFamily, L: np.ndarray, gamma: float) -> np.ndarray:
    """Rows of ``mu_j ∝ pi_j exp(gamma L_j)`` for each row of log-likelihoods ``L``."""
    gamma = _positive("gamma", gamma)
    L = np.atleast_2d(L)
    with np.errstate(invalid="ignore"):
        logw = family.log_prior + gamma * L
    dead = np.all(np.isneginf(logw), axis=1)
    if np.any(dead):
        raise AllModelsZeroLikelihood(
            f"every model has zero likelihood on dataset {int(np.flatnonzero(dead)[0])}"
        )
    mu = np.exp(logw - logsumexp(logw, axis=1, keepdims=True))
    return mu


def gibbs_posterior(family: ModelFamily, data, gamma: float) -> np.ndarray:
    """Generalized Bayesian posterior ``pi_gamma(j | X) ∝ pi_j prod_i p_j(X_i)^gamma``.

    Computed from log-likelihoods with a max-shift, so it does not underflow
    for long datasets. Models with zero likelihood get exactly zero mass.
    ``gamma = 1`` is the ordinary Bayesian posterior.
    """
    c = counts_of(data, family.space_size)
    return gibbs_posterior_batch(family, log_likelihood_matrix(family, c)[None, :], gamma)[0]


def mdl_objectives(family: ModelFamily, data, lam: float) -> np.ndarray:
    """Two-part code lengths ``sum_i ln(1/p_k(X_i)) + lam ln(1/pi_k)`` for every ``k``."""
    lam = _positive("lambda", lam)
    L = log_likelihood_matrix(family, counts_of(data, family.space_size))
    return -L - lam * family.log_prior


def mdl_select_batch(family: ModelFamily, L: np.ndarray, lam: float) -> np.ndarray:
    lam = _positive("lambda", lam)
    obj = -np.atleast_2d(L) - lam * family.log_prior
    dead = np.all(np.isposinf(obj), axis=1)
    if np.any(dead):
        raise AllModelsZeroLikelihood(
            f"every model has zero likelihood on dataset {int(np.flatnonzero(dead)[0])}"
        )
    # argmin returns the first minimizer: lowest-index tie-breaking
    return np.argmin(obj, axis=1)


def mdl_select(family: ModelFamily, data, lam: float) -> int:
    """Index minimizing the two-part description length; ties go to the lowest index."""
    c = counts_of(data, family.space_size)
    return int(mdl_select_batch(family, log_likelihood_matrix(family, c)[None, :], lam)[0])


def point_mass(size: int, k) -> np.ndarray:
    k = np.atleast_1d(k)
    mu = np.zeros((k.size, size))
    mu[np.arange(k.size), k] = 1.0
    return mu


def icm_batch(family: ModelFamily, L: np.ndarray, lam: float, feasible_set: str) -> np.ndarray:
    """Posterior weights of the ICM estimator for each row of log-likelihoods."""
    lam = _positive("lambda", lam)
    if feasible_set == FULL_SIMPLEX:
        return gibbs_posterior_batch(family, L, 1.0 / lam)
    if feasible_set == POINT_MASSES:
        return point_mass(family.size, mdl_select_batch(family, L, lam))
    raise ValueError(f"unknown feasible set {feasible_set!r}; expected one of {FEASIBLE_SETS}")


def icm_minimize(family: ModelFamily, data, lam: float, feasible_set: str = FULL_SIMPLEX) -> np.ndarray:
    """Minimize the regularized empirical risk over the chosen feasible set.

    Over the full simplex the minimizer is the Gibbs posterior at
    ``gamma = 1/lam``; over point masses it is the MDL selection.
    """
    c = counts_of(data, family.space_size)
    return icm_batch(family, log_likelihood_matrix(family, c)[None, :], lam, feasible_set)[0]


def _truth_loglik(q: np.ndarray, counts: np.ndarray) -> np.ndarray:
    if np.any((counts > 0) & (q == 0)):
        raise ShapeMismatch("dataset contains a point with zero mass under q")
    with np.errstate(divide="ignore"):
        logq = np.where(q > 0, np.log(q), 0.0)
    return counts @ logq


def empirical_risk_batch(family: ModelFamily, counts, mu, q, lam: float) -> np.ndarray:
    """Regularized empirical risk for each (dataset, posterior) row pair."""
    counts = np.atleast_2d(counts)
    mu = np.atleast_2d(mu)
    q = as_density(q, family.space_size)
    n = counts.sum(axis=1)
    if np.any(n < 1):
        raise ParameterDomain("empirical risk needs n >= 1")
    L = log_likelihood_matrix(family, counts)
    Lq = _truth_loglik(q, counts)
    with np.errstate(invalid="ignore"):
        ratio = np.where(mu > 0, mu * (Lq[:, None] - L), 0.0)
    return (ratio.sum(axis=1) + lam * kl_entropy(mu, family.prior)) / n


def empirical_risk(family: ModelFamily, data, mu, q, lam: float) -> float:
    """``(1/n) sum_j mu_j sum_i ln(q(X_i)/p_j(X_i)) + (lam/n) KL(mu || pi)``.

    May be negative; ``inf`` when a model with positive weight has zero
    likelihood on the data.
    """
    data = as_dataset(data, family.space_size)
    c = np.bincount(data, minlength=family.space_size)
    return float(empirical_risk_batch(family, c[None, :], np.asarray(mu)[None, :], q, lam)[0])


def true_risk(family: ModelFamily, mu, q, lam: float, n: int) -> float:
    """``sum_j mu_j KL(q || p_j) + (lam/n) KL(mu || pi)``; nonnegative."""
    if n < 1:
        raise ParameterDomain("true risk needs n >= 1")
    mu = np.asarray(mu, dtype=float)
    d = dv.kl(q, family.probs)
    with np.errstate(invalid="ignore"):
        expected = np.sum(np.where(mu > 0, mu * d, 0.0), axis=-1)
    return _scalar(expected + lam / n * kl_entropy(mu, family.prior))


def posterior_mean_density(family: ModelFamily, mu) -> np.ndarray:
    """Mixture ``sum_j mu_j p_j``."""
    return np.asarray(mu, dtype=float) @ family.probs


def posterior_expected_divergence(family: ModelFamily, mu, q, rho: float, kind: str = "renyi"):
    """``sum_j mu_j D(q || p_j)`` for ``kind`` in ``{"rho", "renyi"}``."""
    if kind not in ("rho", "renyi"):
        raise ValueError(f"kind must be 'rho' or 'renyi', got {kind!r}")
    d = dv.divergence(q, family.probs, kind, rho)
    mu = np.asarray(mu, dtype=float)
    with np.errstate(invalid="ignore"):
        return _scalar(np.sum(np.where(mu > 0, mu * d, 0.0), axis=-1))


def posterior_tail_mass(family: ModelFamily, mu, q, rho: float, eps: float):
    """Posterior mass of models at scaled Renyi distance at least ``eps`` from ``q``."""
    if eps < 0:
        raise ParameterDomain("eps must be nonnegative")
    far = dv.renyi_divergence(q, family.probs, rho) >= eps
    return _scalar(np.sum(np.asarray(mu, dtype=float) * far, axis=-1))
