"""Check several risk bounds on one random family by Monte Carlo and exact enumeration.

Run: python3 demos/02_verify_bounds.py
"""

import numpy as np

from icmde import FamilyCover, RngSpec
from icmde import bounds as bd
from icmde.bounds import BoundSpec, verify
from icmde.experiments import random_instance
from icmde.formats import emit_report


def main():
    fam = random_instance(6, 10, np.random.default_rng(2))
    rng = RngSpec(2)
    cover = FamilyCover.random_partition(fam.size, 3, np.random.default_rng(3))
    specs = [
        BoundSpec("thm4.1", 20, lam=2.0),
        BoundSpec("thm5.1", 20, lam=2.0),
        BoundSpec("thm4.2", 20, lam=2.0),
        BoundSpec("thm5.2", 20, gamma=2.0, cover=cover),
        BoundSpec("thm3.2", 20),
        BoundSpec("cor5.1", 20, lam=2.0, t=0.2),
    ]
    reports = [verify(s, fam, replicates=1000, rng=rng) for s in specs]

    # small instances are enumerated exactly instead of sampled
    small = random_instance(3, 4, np.random.default_rng(4))
    reports.append(verify(BoundSpec("thm2.1-exp", 3), small, mode=bd.EXACT))
    reports.append(bd.verify_risk_lower_bound(small, small.truth, 2.0, 2))

    print(emit_report(reports).decode(), end="")


if __name__ == "__main__":
    main()
