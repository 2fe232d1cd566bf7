"""Bernoulli nets of size ceil(sqrt(n)): the global entropy ln(N+1) grows with n
while the localized entropy levels off, and the MDL risk decays at a parametric rate.

Run: python3 demos/04_localized_entropy.py
"""

from icmde import RngSpec
from icmde.experiments import run_parametric_rate_demo


def main():
    rep = run_parametric_rate_demo([16, 64, 256, 1024, 4096], RngSpec(3))
    print(f"{'n':>5} {'N':>3} {'global':>8} {'localized':>9} {'n * risk':>9}")
    for r in rep.rows:
        print(f"{r.n:5d} {r.N:3d} {r.global_entropy:8.4f} {r.localized_entropy:9.4f} {r.n * r.mdl_risk:9.4f}")
    print(f"localized max/min = {rep.localized_ratio:.3f}, global increase = {rep.global_increase:.3f}")


if __name__ == "__main__":
    main()
