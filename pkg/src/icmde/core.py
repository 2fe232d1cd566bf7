"""Finite-probability foundations: densities, model families, datasets, sampling.

Everything lives on a sample space ``{0, ..., M-1}`` with counting measure.
Densities are plain 1-D float arrays; a model family stores its N densities as
the rows of an ``(N, M)`` array together with a strictly positive prior.
Posterior weights are length-N arrays ``mu`` holding the posterior mass of each
model (``mu_j = w_j * pi_j`` in density-w.r.t.-prior notation).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp, rel_entr

from .errors import (
    NegativeMass,
    PriorNotPositive,
    ShapeMismatch,
    SumOutOfTolerance,
)

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class RngSpec:
    """Seed plus stream id for a counter-based (Philox) generator.

    ``generator(*subkey)`` derives independent child streams, so replicate
    ``r`` of an experiment draws from ``generator(r)`` regardless of the
    order in which replicates are executed.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if int(self.stream) < 0:
            raise ValueError(f"stream id must be nonnegative, got {self.stream}")

    def generator(self, *subkey: int) -> np.random.Generator:
        seq = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream), *map(int, subkey)))
        return np.random.Generator(np.random.Philox(seq))


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_density(mass, space_size: int | None = None) -> np.ndarray:
    """Validate a probability mass function and return it as a read-only array."""
    p = np.array(mass, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ShapeMismatch(f"density must be a nonempty 1-D list, got shape {p.shape}")
    if space_size is not None and p.size != space_size:
        raise ShapeMismatch(f"density has {p.size} entries, sample space has {space_size}")
    if not np.all(np.isfinite(p)):
        raise NegativeMass("density contains non-finite entries")
    neg = np.flatnonzero(p < 0)
    if neg.size:
        raise NegativeMass(f"entry {neg[0]} is negative ({p[neg[0]]!r})")
    dev = p.sum() - 1.0
    if abs(dev) > NORMALIZATION_TOL:
        raise SumOutOfTolerance(f"density sums to 1{dev:+.3e}")
    return _readonly(p)


@dataclass(frozen=True, eq=False)
class ModelFamily:
    """Finite list of densities with a strictly positive prior.

    Attributes
    ----------
    probs : ndarray, shape (N, M)
        Row ``j`` is the density ``p_j``.
    prior : ndarray, shape (N,)
    ids : tuple of str
        Model identifiers (defaults to ``"0", "1", ...``).
    truth : ndarray or None
        Optional true density ``q`` carried along from a family file.
    """

    probs: np.ndarray
    prior: np.ndarray
    ids: tuple[str, ...]
    truth: np.ndarray | None = field(default=None)

    @property
    def size(self) -> int:
        return self.probs.shape[0]

    @property
    def space_size(self) -> int:
        return self.probs.shape[1]

    @property
    def log_prior(self) -> np.ndarray:
        return np.log(self.prior)

    def index(self, model_id: str) -> int:
        try:
            return self.ids.index(model_id)
        except ValueError:
            raise KeyError(f"no model with id {model_id!r}") from None

    def __len__(self) -> int:
        return self.size


def validate_family(masses, prior, ids: Sequence[str] | None = None, truth=None) -> ModelFamily:
    """Build a :class:`ModelFamily`, checking every invariant.

    Values are never renormalized: a row or prior that misses 1 by more than
    ``1e-9`` raises :class:`SumOutOfTolerance` naming the offending index.
    """
    try:
        probs = np.array(masses, dtype=float)
    except ValueError as exc:
        raise ShapeMismatch(f"model masses are not rectangular: {exc}") from None
    if probs.ndim != 2 or probs.shape[0] == 0 or probs.shape[1] == 0:
        raise ShapeMismatch(f"model masses must be a nonempty N x M table, got shape {probs.shape}")
    pri = np.array(prior, dtype=float)
    if pri.ndim != 1 or pri.size != probs.shape[0]:
        raise ShapeMismatch(f"prior has shape {pri.shape}, expected ({probs.shape[0]},)")

    if not np.all(np.isfinite(probs)):
        raise NegativeMass("model masses contain non-finite entries")
    bad = np.argwhere(probs < 0)
    if bad.size:
        j, x = bad[0]
        raise NegativeMass(f"model {j} has negative mass {probs[j, x]!r} at point {x}")
    dev = probs.sum(axis=1) - 1.0
    off = np.flatnonzero(np.abs(dev) > NORMALIZATION_TOL)
    if off.size:
        raise SumOutOfTolerance(f"model {off[0]} sums to 1{dev[off[0]]:+.3e}")

    nonpos = np.flatnonzero(~(pri > 0))
    if nonpos.size:
        raise PriorNotPositive(f"prior of model {nonpos[0]} is {pri[nonpos[0]]!r}; must be > 0")
    pdev = pri.sum() - 1.0
    if abs(pdev) > NORMALIZATION_TOL:
        raise SumOutOfTolerance(f"prior sums to 1{pdev:+.3e}")

    if ids is None:
        ids = tuple(str(j) for j in range(probs.shape[0]))
    else:
        ids = tuple(str(i) for i in ids)
        if len(ids) != probs.shape[0]:
            raise ShapeMismatch(f"{len(ids)} ids for {probs.shape[0]} models")
        if len(set(ids)) != len(ids):
            raise ShapeMismatch("model ids must be unique")
    if truth is not None:
        truth = as_density(truth, probs.shape[1])
    return ModelFamily(_readonly(probs), _readonly(pri), ids, truth)


def as_dataset(samples, space_size: int) -> np.ndarray:
    data = np.asarray(samples, dtype=np.int64).reshape(-1)
    if data.size and (data.min() < 0 or data.max() >= space_size):
        raise ShapeMismatch(f"sample indices must lie in [0, {space_size})")
    return data


def counts_of(data, space_size: int) -> np.ndarray:
    return np.bincount(as_dataset(data, space_size), minlength=space_size)


def sample_dataset(q, n: int, rng: RngSpec) -> np.ndarray:
    """Draw ``n`` i.i.d. indices from ``q``; deterministic given ``rng``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    q = as_density(q)
    return rng.generator().choice(q.size, size=n, p=q)


def sample_counts(q, n: int, replicates: int, rng: RngSpec, key: tuple[int, ...] = ()) -> np.ndarray:
    """Count vectors of ``replicates`` independent datasets, shape ``(replicates, M)``.

    Replicate ``r`` is drawn from stream ``rng.generator(*key, r)``, so the
    result does not depend on how replicates are scheduled.
    """
    q = as_density(q)
    out = np.empty((replicates, q.size), dtype=np.int64)
    for r in range(replicates):
        data = rng.generator(*key, r).choice(q.size, size=n, p=q)
        out[r] = np.bincount(data, minlength=q.size)
    return out


def log_likelihood_matrix(family: ModelFamily, counts) -> np.ndarray:
    """Log-likelihoods ``L[s, j] = sum_x counts[s, x] ln p_j(x)``.

    Entries are ``-inf`` exactly when model ``j`` gives zero mass to a point
    observed in dataset ``s``.  ``counts`` may be a single count vector.
    """
    c = np.asarray(counts)
    with np.errstate(divide="ignore"):
        logp = np.log(family.probs)
    finite = np.where(family.probs > 0, logp, 0.0)
    L = c @ finite.T
    impossible = (c > 0).astype(float) @ (family.probs == 0).T.astype(float)
    return np.where(impossible > 0, -np.inf, L)


def log_likelihood(family: ModelFamily, j: int, data) -> float:
    """Sum of ``ln p_j(X_i)`` over the dataset; ``-inf`` on any zero-mass observation."""
    data = as_dataset(data, family.space_size)
    p = family.probs[j, data]
    if np.any(p == 0):
        return -np.inf
    return float(np.sum(np.log(p)))


def kl_entropy(mu, prior) -> float:
    """KL-entropy of posterior weights against the prior, ``sum_j mu_j ln(mu_j / pi_j)``."""
    mu = np.asarray(mu, dtype=float)
    prior = np.asarray(prior, dtype=float)
    if mu.shape[-1] != prior.shape[-1]:
        raise ShapeMismatch("posterior and prior lengths differ")
    return np.sum(rel_entr(mu, prior), axis=-1)


def convex_duality_gap(mu, f, prior) -> float:
    """Slack in ``E_w f <= KL(w dpi || dpi) + ln E_pi exp(f)``.

    Zero exactly when ``mu`` is proportional to ``prior * exp(f)``.
    """
    mu = np.asarray(mu, dtype=float)
    f = np.asarray(f, dtype=float)
    prior = np.asarray(prior, dtype=float)
    log_mgf = logsumexp(f, b=prior)
    return float(kl_entropy(mu, prior) + log_mgf - np.dot(mu, f))


def gibbs_weights(prior, f) -> np.ndarray:
    """Normalized weights proportional to ``prior * exp(f)`` (max-shifted)."""
    logw = np.log(prior) + np.asarray(f, dtype=float)
    return np.exp(logw - logsumexp(logw, axis=-1, keepdims=True))
