"""Drift of the mass-function evolution started at the steady state.

For each m, runs T = 1 on three grids and reports sup_r |M - M0| and the
observed order between successive grids.
"""

import argparse
import math
import time

from ksground.masspde import evolution_grid, evolve, steady_initial
from ksground.steady import solve_steady


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--T", type=float, default=1.0)
    ap.add_argument("--m", type=float, nargs="*", default=[1.5, 2.0, 3.0])
    args = ap.parse_args()
    for m in args.m:
        s = solve_steady(m, 1.0)
        drifts = []
        t0 = time.perf_counter()
        for n in (301, 601, 1201):
            run = evolve(steady_initial(s, evolution_grid(s, n)), args.T, checkpoints=4, reference=s)
            drifts.append(max(run.distances))
        orders = [math.log2(a / b) for a, b in zip(drifts, drifts[1:])]
        print(f"m={m:g}: drift " + ", ".join(f"{d:.3e}" for d in drifts)
              + " | orders " + ", ".join(f"{o:.2f}" for o in orders)
              + f" | {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
