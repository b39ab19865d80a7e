"""Observed order of the support radius under step halving.

Reference radius: the Bessel zero for m = 2, a much finer shot otherwise.
The free boundary is bisected to 1e-6 dr, so individual orders get noisy
once |dR| approaches that floor; the fitted slope uses the whole ladder.
"""

import math

import numpy as np

from ksground.steady import shoot_profile

J01 = 2.404825557695773
LADDER = (0.8, 0.4, 0.2, 0.1, 0.05)


def main():
    for m in (1.5, 2.0, 3.0, 5.0):
        ref = math.sqrt(2) * J01 if m == 2 else shoot_profile(m, 1.0, 0.002).R
        errs = [abs(shoot_profile(m, 1.0, dr).R - ref) for dr in LADDER]
        orders = [math.log2(a / b) if b > 0 else float("nan") for a, b in zip(errs, errs[1:])]
        slope = np.polyfit(np.log(LADDER), np.log(errs), 1)[0]
        print(f"m={m:g} R_ref={ref:.10f}")
        print("   dr     : " + " ".join(f"{d:9.3g}" for d in LADDER))
        print("   |dR|   : " + " ".join(f"{e:9.2e}" for e in errs))
        print("   orders : " + " ".join(f"{o:9.2f}" for o in orders) + f"   fitted slope {slope:.2f}")


if __name__ == "__main__":
    main()
