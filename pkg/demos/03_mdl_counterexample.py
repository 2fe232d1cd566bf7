"""Standard MDL (lambda = 1) can stay wrong with constant probability even when
the truth is in the family and its resolvability is ln 4 / n.

Run: python3 demos/03_mdl_counterexample.py
"""

import math

from icmde import RngSpec
from icmde.experiments import CounterexampleConfig, run_counterexample


def main():
    for n, m in [(2, 7), (4, 26), (8, 128)]:
        rep = run_counterexample(CounterexampleConfig(n, m, 2000, RngSpec(7)))
        print(
            f"n={n:2d} m={m:3d}: P(MDL picks truth) = {rep.p_correct:.3f} +- {rep.se:.3f}"
            f" (exact {rep.exact_probability:.3f}, bound {rep.bound:.3f}),"
            f" resolvability = {rep.resolvability:.4f} = ln4/n = {math.log(4) / n:.4f}"
        )


if __name__ == "__main__":
    main()
