"""Divergences between densities on a finite sample space.

All functions broadcast over leading axes: passing ``q`` of shape ``(M,)`` and
``p`` of shape ``(N, M)`` returns ``N`` divergences, one per row of ``p``.
Infinite values are returned as ``inf``, never ``nan``.
"""

from __future__ import annotations

import numpy as np
from scipy.special import rel_entr

from .errors import RhoOutOfRange


def check_rho(rho: float) -> float:
    rho = float(rho)
    if not 0.0 < rho < 1.0:
        raise RhoOutOfRange(f"rho must lie in the open interval (0, 1), got {rho}")
    return rho


def _scalar(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def kl(q, p):
    """``D_KL(q || p) = sum_x q(x) ln(q(x)/p(x))``, with ``0 ln 0 = 0``."""
    return _scalar(np.sum(rel_entr(np.asarray(q, float), np.asarray(p, float)), axis=-1))


def power_mean(q, p, rho: float):
    """Affinity ``E_q (p/q)^rho``, summed over the support of ``q``.

    Ratios are formed in log space so extreme masses neither overflow nor
    produce ``nan``.
    """
    q, p = np.broadcast_arrays(np.asarray(q, float), np.asarray(p, float))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.exp(rho * (np.log(p) - np.log(q)))
        terms = np.where(q > 0, q * ratio, 0.0)
    return _scalar(np.sum(terms, axis=-1))


def rho_divergence(q, p, rho: float):
    """``D_rho(q || p) = (1 - E_q (p/q)^rho) / (rho (1 - rho))``; always finite."""
    rho = check_rho(rho)
    a = np.asarray(power_mean(q, p, rho))
    # affinity can exceed 1 by an ulp when p == q
    return _scalar(np.maximum(0.0, (1.0 - a) / (rho * (1.0 - rho))))


def renyi_divergence(q, p, rho: float):
    """Scaled Renyi divergence ``-ln E_q (p/q)^rho / (rho (1 - rho))``.

    ``inf`` exactly when the supports of ``q`` and ``p`` are disjoint.
    """
    rho = check_rho(rho)
    a = np.asarray(power_mean(q, p, rho))
    with np.errstate(divide="ignore"):
        d = -np.log(a) / (rho * (1.0 - rho))
    return _scalar(np.maximum(0.0, d))


def hellinger_sq(q, p):
    """The rho = 1/2 divergence (four times one minus the Bhattacharyya affinity)."""
    return rho_divergence(q, p, 0.5)


def divergence(q, p, kind: str, rho: float | None = None):
    """Dispatch by name: ``kl``, ``rho``, ``renyi`` or ``hellinger``."""
    if kind == "kl":
        return kl(q, p)
    if kind == "hellinger":
        return hellinger_sq(q, p)
    if rho is None:
        raise RhoOutOfRange(f"divergence kind {kind!r} needs rho")
    if kind == "rho":
        return rho_divergence(q, p, rho)
    if kind == "renyi":
        return renyi_divergence(q, p, rho)
    raise ValueError(f"unknown divergence kind {kind!r}")
