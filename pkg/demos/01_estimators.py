"""Fit MDL and a Gibbs posterior on a small random family and compare their risks.

Run: python3 demos/01_estimators.py
"""

import numpy as np

from icmde import (
    RngSpec,
    bayesian_resolvability,
    empirical_risk,
    gibbs_posterior,
    index_of_resolvability,
    mdl_select,
    renyi_divergence,
    sample_dataset,
)
from icmde.experiments import random_instance


def main():
    fam = random_instance(6, 10, np.random.default_rng(1))
    q, lam, n = fam.truth, 2.0, 40
    data = sample_dataset(q, n, RngSpec(1))

    k = mdl_select(fam, data, lam)
    mu = gibbs_posterior(fam, data, 1 / lam)
    point = np.eye(fam.size)[k]

    print(f"n = {n}, lambda = {lam}")
    print(f"MDL picks model {fam.ids[k]} with D^Re_0.5(q||p) = {renyi_divergence(q, fam.probs[k], 0.5):.4f}")
    print(f"Gibbs posterior: {np.array2string(mu, precision=3)}")
    # the Gibbs posterior minimizes the regularized empirical risk over the whole simplex
    print(f"R_hat(MDL point mass) = {empirical_risk(fam, data, point, q, lam):.4f}")
    print(f"R_hat(Gibbs)          = {empirical_risk(fam, data, mu, q, lam):.4f}")
    print(f"index of resolvability = {index_of_resolvability(fam, q, lam, n):.4f}")
    print(f"Bayesian resolvability = {bayesian_resolvability(fam, q, lam, n)[0]:.4f}")


if __name__ == "__main__":
    main()
