"""Equimeasurability and Riesz ordering on the seeded 2D fixtures.

Reports the worst relative L^p error of the rearrangement for several p,
so the exponent used by the verification suite can be judged.
"""

import argparse

import numpy as np

from ksground.radial import lp_norm
from ksground.rearrange import rearrange_2d, riesz_log_check
from ksground.suites import case_rng, random_bumps


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--cases", type=int, default=100)
    ap.add_argument("--n", type=int, default=256)
    args = ap.parse_args()
    ps = (1.0, 1.5, 2.0, 3.0, 4.0)
    worst = dict.fromkeys(ps, 0.0)
    riesz_min = np.inf
    for cid in range(args.cases):
        rho2 = random_bumps(case_rng(args.seed, cid), n=args.n)
        rs = rearrange_2d(rho2)
        for p in ps:
            direct = float(np.sum(rho2.values**p) * rho2.h**2) ** (1 / p)
            worst[p] = max(worst[p], abs(lp_norm(rs, p) / direct - 1))
        before, after, _ = riesz_log_check(rho2)
        riesz_min = min(riesz_min, (before - after) / max(abs(before), abs(after), rho2.mass**2))
    for p in ps:
        print(f"L^{p:g}: worst relative error {worst[p]:.2e}")
    print(f"smallest relative Riesz margin {riesz_min:.3e}")


if __name__ == "__main__":
    main()
