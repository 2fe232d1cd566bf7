"""Complexity functionals of a model family relative to a true density.

Infima over a radius ``eps`` are taken exactly: the prior mass of a KL ball is
a step function of ``eps`` that only changes at the distinct finite KL values,
so the optimum always sits at one of those breakpoints.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import logsumexp

from . import divergences as dv
from .core import ModelFamily, as_density
from .errors import AllInfiniteKL, EmptyBlock, InvalidCover, NotAPartition, ParameterDomain

EXACT_BRACKETING_MAX_MODELS = 12


@dataclass(frozen=True)
class FamilyCover:
    """A cover of the model indices ``0..N-1`` by (possibly overlapping) blocks."""

    blocks: tuple[tuple[int, ...], ...]
    size: int

    def __post_init__(self):
        if not self.blocks:
            raise InvalidCover("a cover needs at least one block")
        seen: set[int] = set()
        for b in self.blocks:
            if not b:
                raise EmptyBlock("cover blocks must be nonempty")
            if any(not 0 <= j < self.size for j in b):
                raise InvalidCover(f"block {b} has indices outside [0, {self.size})")
            seen.update(b)
        if len(seen) != self.size:
            missing = sorted(set(range(self.size)) - seen)
            raise InvalidCover(f"models {missing} are not covered")

    @property
    def is_partition(self) -> bool:
        return sum(len(b) for b in self.blocks) == self.size

    @classmethod
    def of(cls, blocks: Iterable[Iterable[int]], size: int) -> "FamilyCover":
        return cls(tuple(tuple(sorted(set(int(j) for j in b))) for b in blocks), size)

    @classmethod
    def singletons(cls, size: int) -> "FamilyCover":
        return cls(tuple((j,) for j in range(size)), size)

    @classmethod
    def whole(cls, size: int) -> "FamilyCover":
        return cls((tuple(range(size)),), size)

    @classmethod
    def random_partition(cls, size: int, k: int, gen: np.random.Generator) -> "FamilyCover":
        """Random partition into ``k`` nonempty blocks."""
        if not 1 <= k <= size:
            raise InvalidCover(f"cannot split {size} models into {k} nonempty blocks")
        labels = np.concatenate([np.arange(k), gen.integers(0, k, size - k)])
        gen.shuffle(labels)
        return cls.of([np.flatnonzero(labels == b) for b in range(k)], size)

    def block_priors(self, prior) -> np.ndarray:
        prior = np.asarray(prior)
        return np.array([prior[list(b)].sum() for b in self.blocks])


@dataclass(frozen=True)
class CriticalRadius:
    value: float
    achieved_at: float


@dataclass(frozen=True)
class BracketingNumber:
    count: int
    blocks: tuple[tuple[int, ...], ...]
    exact: bool


def _kl_to_models(family: ModelFamily, q) -> np.ndarray:
    q = as_density(q, family.space_size)
    return np.asarray(dv.kl(q, family.probs), dtype=float).reshape(-1)


def _check_n_lam(n: int, lam: float):
    if n < 1:
        raise ParameterDomain(f"n must be >= 1, got {n}")
    if not lam > 0:
        raise ParameterDomain(f"lambda must be positive, got {lam}")


def index_of_resolvability(family: ModelFamily, q, lam: float, n: int) -> float:
    """``min_k [KL(q || p_k) + (lam/n) ln(1/pi_k)]``."""
    _check_n_lam(n, lam)
    d = _kl_to_models(family, q)
    return float(np.min(d - lam / n * family.log_prior))


def bayesian_resolvability(family: ModelFamily, q, lam: float, n: int) -> tuple[float, np.ndarray]:
    """Soft-min resolvability ``-(lam/n) ln E_pi exp(-(n/lam) KL(q || p))``.

    Returns the value and the weights ``mu_j ∝ pi_j exp(-(n/lam) KL_j)``
    that attain it; models with infinite KL get zero weight.
    """
    _check_n_lam(n, lam)
    d = _kl_to_models(family, q)
    if np.all(np.isinf(d)):
        raise AllInfiniteKL("every model has infinite KL divergence from q")
    logw = family.log_prior - (n / lam) * d
    lse = logsumexp(logw)
    return float(-(lam / n) * lse), np.exp(logw - lse)


def _kl_breakpoints(family: ModelFamily, q):
    d = _kl_to_models(family, q)
    finite = np.isfinite(d)
    if not finite.any():
        raise AllInfiniteKL("every model has infinite KL divergence from q")
    order = np.argsort(d[finite], kind="stable")
    ds = d[finite][order]
    ps = family.prior[finite][order]
    levels, first = np.unique(ds, return_index=True)
    ball_mass = np.cumsum(ps)[np.r_[first[1:] - 1, ds.size - 1]]
    return levels, ball_mass


def prior_mass_resolvability_bound(family: ModelFamily, q, lam: float, n: int) -> float:
    """``inf_eps [eps - (lam/n) ln pi(KL(q || p) <= eps)]``, exact over breakpoints."""
    _check_n_lam(n, lam)
    levels, mass = _kl_breakpoints(family, q)
    return float(np.min(levels - lam / n * np.log(mass)))


def critical_prior_mass_radius(family: ModelFamily, q, lam: float, n: int) -> CriticalRadius:
    """Smallest ``eps`` with ``eps >= -(lam/n) ln pi(KL(q || p) <= eps)``.

    On ``[d_i, d_{i+1})`` the right side is a constant ``c_i``, so the
    smallest feasible point there is ``max(d_i, c_i)``; the overall answer is
    the minimum of these candidates.
    """
    _check_n_lam(n, lam)
    levels, mass = _kl_breakpoints(family, q)
    c = -(lam / n) * np.log(mass)
    cand = np.maximum(levels, c)
    i = int(np.argmin(cand))
    return CriticalRadius(float(cand[i]), float(levels[i]))


def upper_bracketing_radius(family: ModelFamily, block: Sequence[int]) -> float:
    """Mass of the pointwise envelope of a block, minus one."""
    block = list(block)
    if not block:
        raise EmptyBlock("block must be nonempty")
    env = family.probs[block].max(axis=0)
    return max(0.0, float(env.sum() - 1.0))


def _envelope_feasible(probs: np.ndarray, eps: float) -> np.ndarray:
    """Boolean table over subset bitmasks: does the subset's envelope have r_ub <= eps."""
    N = probs.shape[0]
    env = np.zeros((1 << N, probs.shape[1]))
    for mask in range(1, 1 << N):
        low = mask & -mask
        j = low.bit_length() - 1
        env[mask] = np.maximum(env[mask ^ low], probs[j])
    ok = env.sum(axis=1) - 1.0 <= eps + 1e-12
    ok[0] = True
    return ok


def _exact_min_cover(probs: np.ndarray, eps: float) -> list[int]:
    N = probs.shape[0]
    ok = _envelope_feasible(probs, eps)
    full = (1 << N) - 1
    best = np.full(1 << N, N + 1, dtype=np.int64)
    choice = np.zeros(1 << N, dtype=np.int64)
    best[0] = 0
    for S in range(1, full + 1):
        low = S & -S
        rest = S ^ low
        # enumerate blocks T containing the lowest element of S
        sub = rest
        while True:
            T = sub | low
            if ok[T] and best[S ^ T] + 1 < best[S]:
                best[S] = best[S ^ T] + 1
                choice[S] = T
            if sub == 0:
                break
            sub = (sub - 1) & rest
    blocks, S = [], full
    while S:
        blocks.append(int(choice[S]))
        S ^= int(choice[S])
    return blocks


def upper_bracketing_number(family: ModelFamily, eps: float) -> BracketingNumber:
    """Fewest pointwise-max envelopes with excess mass ``<= eps`` covering the family.

    Exact (exhaustive subset search) for up to 12 models; for larger
    families a greedy cover is returned with ``exact=False``, which is only an
    upper bound on the envelope-optimal count.
    """
    if eps < 0:
        raise ParameterDomain("eps must be nonnegative")
    N = family.size
    if N <= EXACT_BRACKETING_MAX_MODELS:
        masks = _exact_min_cover(family.probs, eps)
        blocks = tuple(tuple(j for j in range(N) if m >> j & 1) for m in masks)
        return BracketingNumber(len(blocks), tuple(sorted(blocks)), True)
    uncovered = list(range(N))
    blocks = []
    while uncovered:
        block = [uncovered.pop(0)]
        env = family.probs[block[0]].copy()
        for j in list(uncovered):
            cand = np.maximum(env, family.probs[j])
            if cand.sum() - 1.0 <= eps + 1e-12:
                env = cand
                block.append(j)
                uncovered.remove(j)
        blocks.append(tuple(block))
    return BracketingNumber(len(blocks), tuple(blocks), False)


def cover_complexity_term(family: ModelFamily, cover: FamilyCover, s: float, n: int) -> float:
    """``ln sum_j pi(G_j)^s (1 + r_ub(G_j))^n``, evaluated in log space."""
    if not 0.0 <= s <= 1.0:
        raise ParameterDomain(f"s must lie in [0, 1], got {s}")
    if cover.size != family.size:
        raise InvalidCover("cover size does not match the family")
    log_mass = np.log(cover.block_priors(family.prior))
    r = np.array([upper_bracketing_radius(family, b) for b in cover.blocks])
    return float(logsumexp(s * log_mass + n * np.log1p(r)))


def _weighted_log_mean_exp(family: ModelFamily, exponent: np.ndarray) -> float:
    # exponent may contain -inf (zero contribution)
    return float(logsumexp(family.log_prior + exponent))


def localized_entropy_term(
    family: ModelFamily, q, rho: float, n: int, k: int, shrink: float = 0.5
) -> float:
    """``ln sum_j pi_j exp(-shrink rho(1-rho) n D^Re(q||p_j)) - ln pi_k``.

    Never exceeds the global entropy ``ln(1/pi_k)``.
    """
    rho = dv.check_rho(rho)
    if not 0.0 < shrink <= 1.0:
        raise ParameterDomain(f"shrink must lie in (0, 1], got {shrink}")
    if n == 0:
        return float(-family.log_prior[k])
    d = np.asarray(dv.renyi_divergence(q, family.probs, rho)).reshape(-1)
    expo = np.where(np.isinf(d), -np.inf, -shrink * rho * (1 - rho) * n * d)
    return _weighted_log_mean_exp(family, expo) - float(family.log_prior[k])


def c_rho_n_alpha(family: ModelFamily, q, rho: float, n: int, alpha: float) -> float:
    """``(1/n) ln E_pi exp(-rho(1-rho)(1-alpha) n D^Re(q||p))``; zero at ``alpha = 1``."""
    rho = dv.check_rho(rho)
    if n < 1:
        raise ParameterDomain("n must be >= 1")
    if alpha == 1:
        return 0.0
    a = np.asarray(dv.power_mean(q, family.probs, rho)).reshape(-1)
    with np.errstate(divide="ignore"):
        expo = (1.0 - alpha) * n * np.log(a)
    # 0 * ln 0 cannot occur here: alpha != 1 and n >= 1
    return _weighted_log_mean_exp(family, expo) / n


def log_ratio_loss(family: ModelFamily, q, scale: float = 1.0) -> np.ndarray:
    """Loss table ``scale * ln(q(x)/p_j(x))``, shape ``(N, M)``; ``+inf`` where ``p_j(x) = 0 < q(x)``.

    Columns where ``q(x) = 0`` are set to 0; they carry no weight under ``E_q``.
    """
    q = as_density(q, family.space_size)
    with np.errstate(divide="ignore", invalid="ignore"):
        ell = scale * (np.log(q) - np.log(family.probs))
    return np.where(q > 0, ell, 0.0)


def log_mgf_q(q, loss: np.ndarray, beta: float = 1.0) -> np.ndarray:
    """``ln E_q exp(-beta * loss)`` for each row of ``loss``."""
    q = np.asarray(q, dtype=float)
    support = q > 0
    with np.errstate(invalid="ignore"):
        expo = np.where(np.isposinf(loss), -np.inf, -beta * loss)
    return logsumexp(expo[..., support], b=q[support], axis=-1)


def c_n_general(family: ModelFamily, q, loss, n: int, alpha: float, beta: float) -> float:
    """``(1/n) ln E_pi (E_q e^{-l} / (E_q e^{-beta l})^alpha)^n`` for a loss table ``l``.

    Vanishes identically when ``alpha = beta = 1``.
    """
    if n < 1:
        raise ParameterDomain("n must be >= 1")
    if alpha == 1 and beta == 1:
        return 0.0
    loss = np.asarray(loss, dtype=float)
    num = log_mgf_q(q, loss, 1.0)
    den = log_mgf_q(q, loss, beta)
    with np.errstate(invalid="ignore"):
        per_model = num - alpha * den if alpha != 0 else num
    per_model = np.where(np.isneginf(num), -np.inf, per_model)
    return _weighted_log_mean_exp(family, n * per_model) / n


def bracketing_entropy_bound(family: ModelFamily, n: int, eps_grid: Iterable[float]) -> tuple[float, float]:
    """``min_eps [ln N_ub(eps)/n + ln(1 + eps)]`` over a grid; returns (value, argmin eps)."""
    best = (np.inf, np.nan)
    for eps in eps_grid:
        val = np.log(upper_bracketing_number(family, eps).count) / n + np.log1p(eps)
        if val < best[0]:
            best = (float(val), float(eps))
    return best


def all_blocks(size: int, max_block: int) -> Iterable[tuple[int, ...]]:
    for k in range(1, max_block + 1):
        yield from itertools.combinations(range(size), k)
