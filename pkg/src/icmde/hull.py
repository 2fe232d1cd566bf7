"""Divergence extrema over convex hulls of densities, and n-fold product mixtures.

Both hull infima reduce to maximizing a separable concave function of the
mixture density ``p_w = sum_k w_k p_k`` over the simplex of weights ``w``:

* scaled Renyi and rho-divergences are decreasing transforms of the
  affinity ``g(w) = sum_x q(x)^(1-rho) p_w(x)^rho``;
* the KL divergence equals ``H(q) - sum_x q(x) ln p_w(x)``.

The maximization uses Frank-Wolfe with away steps and exact line search,
which keeps iterates on the simplex and converges linearly for these
strictly concave (in ``p_w``) objectives.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import divergences as dv
from .core import ModelFamily, as_density
from .errors import EmptyBlock, NonConvergenceWarning, ProductSpaceTooLarge

PRODUCT_SPACE_CAP = 10**6


@dataclass(frozen=True)
class HullResult:
    """Outcome of a hull maximization.

    ``trace`` holds the objective after every iteration (starting with the
    initial uniform mixture) and is nondecreasing.
    """

    value: float
    weights: np.ndarray
    iterations: int
    converged: bool
    trace: tuple[float, ...] = field(default=(), repr=False)


class _Objective:
    """Separable concave objective ``sum_x phi_x(s_x)`` on the support of q."""

    def __init__(self, kind: str, q: np.ndarray, rho: float | None = None):
        self.kind = kind
        self.q = q
        self.rho = rho
        if kind == "power":
            self.c = q ** (1.0 - rho)

    def value(self, s: np.ndarray) -> float:
        with np.errstate(divide="ignore"):
            if self.kind == "power":
                return float(np.sum(self.c * s**self.rho))
            return float(np.sum(self.q * np.log(s)))

    def deriv(self, s: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            if self.kind == "power":
                return self.rho * self.c * s ** (self.rho - 1.0)
            return self.q / s


def _masked_dot(B: np.ndarray, d: np.ndarray) -> np.ndarray:
    """``B @ d`` where ``0 * inf`` counts as 0."""
    with np.errstate(invalid="ignore"):
        prod = np.where(B != 0, B * d, 0.0)
    return prod.sum(axis=-1)


def _line_search(obj: _Objective, s: np.ndarray, ds: np.ndarray, gmax: float) -> float:
    def slope(t):
        return float(_masked_dot(ds, obj.deriv(s + t * ds)))

    if slope(gmax) >= 0:
        return gmax
    lo, hi = 0.0, gmax
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if slope(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo


def _maximize(obj: _Objective, B: np.ndarray, tol: float, max_iter: int) -> HullResult:
    K = B.shape[0]
    w = np.full(K, 1.0 / K)
    s = w @ B
    h = obj.value(s)
    trace = [h]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        grad = _masked_dot(B, obj.deriv(s))
        wg = float(np.sum(np.where(w > 0, w * grad, 0.0)))
        i_fw = int(np.argmax(grad))
        fw_gap = grad[i_fw] - wg
        if fw_gap <= tol:
            converged = True
            it -= 1
            break
        active = np.flatnonzero(w > 0)
        i_aw = int(active[np.argmin(grad[active])])
        away_gap = wg - grad[i_aw]
        if fw_gap >= away_gap or w[i_aw] >= 1.0:
            d = -w.copy()
            d[i_fw] += 1.0
            gmax = 1.0
        else:
            d = w.copy()
            d[i_aw] -= 1.0
            gmax = w[i_aw] / (1.0 - w[i_aw])
        step = _line_search(obj, s, d @ B, gmax)
        w_new = w + step * d
        w_new[w_new < 0] = 0.0
        if step == gmax and d[i_aw] < 0 and gmax != 1.0:
            w_new[i_aw] = 0.0  # drop step
        w_new /= w_new.sum()
        s_new = w_new @ B
        h_new = obj.value(s_new)
        if not h_new >= h:
            # no representable improvement left along this direction
            converged = fw_gap <= max(tol, 1e-12 * abs(h))
            it -= 1
            break
        w, s, h = w_new, s_new, h_new
        trace.append(h)
    if not converged:
        warnings.warn(
            f"hull optimizer stopped after {max_iter} iterations without meeting the gap tolerance",
            NonConvergenceWarning,
            stacklevel=3,
        )
    return HullResult(h, w, it, converged, tuple(trace))


def _block_array(block) -> np.ndarray:
    B = np.atleast_2d(np.asarray(block, dtype=float))
    if B.shape[0] == 0:
        raise EmptyBlock("block must contain at least one density")
    return B


def max_power_mean_over_hull(q, block, rho: float, tol: float = 1e-8, max_iter: int = 10_000) -> HullResult:
    """Maximize ``E_q (p/q)^rho`` over mixtures ``p`` of the rows of ``block``.

    The maximum is at most 1, with equality iff ``q`` lies in the hull.
    """
    rho = dv.check_rho(rho)
    q = as_density(q)
    B = _block_array(block)
    sup = q > 0
    B = B[:, sup]
    if not np.any(B > 0):
        K = B.shape[0]
        return HullResult(0.0, np.full(K, 1.0 / K), 0, True, (0.0,))
    return _maximize(_Objective("power", q[sup], rho), B, tol, max_iter)


def inf_renyi_over_hull(q, block, rho: float, **kw) -> float:
    """``inf_{p in co(block)} D^Re_rho(q || p)``."""
    g = max_power_mean_over_hull(q, block, rho, **kw).value
    if g <= 0:
        return np.inf
    return max(0.0, -np.log(g) / (rho * (1.0 - rho)))


def inf_rho_over_hull(q, block, rho: float, **kw) -> float:
    """``inf_{p in co(block)} D_rho(q || p)``; same maximizer as the Renyi version."""
    g = max_power_mean_over_hull(q, block, rho, **kw).value
    return max(0.0, (1.0 - g) / (rho * (1.0 - rho)))


def min_kl_over_hull(q, block, tol: float = 1e-8, max_iter: int = 10_000) -> HullResult:
    """Maximize ``sum_x q(x) ln p_w(x)``; ``value`` holds the minimal KL divergence."""
    q = as_density(q)
    B = _block_array(block)
    sup = q > 0
    B = B[:, sup]
    K = B.shape[0]
    if np.any(B.sum(axis=0) == 0):
        return HullResult(np.inf, np.full(K, 1.0 / K), 0, True, (-np.inf,))
    res = _maximize(_Objective("kl", q[sup]), B, tol, max_iter)
    neg_entropy = float(np.sum(q[sup] * np.log(q[sup])))
    return HullResult(max(0.0, neg_entropy - res.value), res.weights, res.iterations, res.converged, res.trace)


def inf_kl_over_hull(q, block, **kw) -> float:
    return min_kl_over_hull(q, block, **kw).value


def sup_kl_over_hull(q, block) -> float:
    """KL is convex in its second argument, so the hull supremum sits at a vertex."""
    B = _block_array(block)
    return float(np.max(dv.kl(as_density(q), B)))


def sup_renyi_over_hull(q, block, rho: float) -> float:
    """The affinity is concave, so its hull minimum (Renyi supremum) sits at a vertex."""
    B = _block_array(block)
    return float(np.max(dv.renyi_divergence(as_density(q), B, rho)))


def _log_product_table(logp: np.ndarray, n: int) -> np.ndarray:
    """``sum_i logp[X_i]`` for every ``X`` in ``{0..M-1}^n``, C order."""
    out = np.zeros(1)
    for _ in range(n):
        out = np.add.outer(out, logp).reshape(-1)
    return out


def block_mixture_product_divergence(q, family: ModelFamily, block, rho: float | None, n: int, kind: str = "renyi") -> float:
    """Divergence between ``q^n`` and the prior mixture of ``p^n`` over a block.

    The mixture is ``p_B(X) = sum_{k in B} pi_k prod_i p_k(X_i) / pi(B)``;
    the value is computed by enumerating all ``M^n`` outcomes, which is
    capped at one million.
    """
    q = as_density(q, family.space_size)
    block = list(block)
    if not block:
        raise EmptyBlock("block must be nonempty")
    M = family.space_size
    if M**n > PRODUCT_SPACE_CAP:
        raise ProductSpaceTooLarge(f"{M}^{n} outcomes exceed the enumeration cap {PRODUCT_SPACE_CAP}")
    with np.errstate(divide="ignore"):
        lq = _log_product_table(np.log(q), n)
        logs = np.stack([_log_product_table(np.log(family.probs[k]), n) for k in block])
    lw = family.log_prior[block]
    lp = logsumexp(logs + lw[:, None], axis=0) - logsumexp(lw)
    sup = np.isfinite(lq)
    lq, lp = lq[sup], lp[sup]
    if kind == "kl":
        if np.any(np.isneginf(lp)):
            return np.inf
        return max(0.0, float(np.sum(np.exp(lq) * (lq - lp))))
    if kind == "renyi":
        rho = dv.check_rho(rho)
        with np.errstate(divide="ignore"):
            a = float(np.sum(np.exp((1.0 - rho) * lq + rho * lp)))
            return max(0.0, -np.log(a) / (rho * (1.0 - rho))) if a > 0 else np.inf
    raise ValueError(f"kind must be 'renyi' or 'kl', got {kind!r}")
