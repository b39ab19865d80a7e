"""Relaxation from a spread-out start, with the barrier monitor.

Starts from a^2 rho0(a r), evolves to T, fits the exponential rate of the
sup distance and checks the ordering against barriers built with the
smaller constant C1 and, for comparison, with C2.
"""

import argparse
import time

from ksground.io import default_out_dir, write_json
from ksground.masspde import (
    Barrier,
    comparison_monitor,
    concentration_constants,
    convergence_rate,
    evolution_grid,
    evolve,
    steady_initial,
)
from ksground.steady import solve_steady


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=float, default=2.0)
    ap.add_argument("--mass", type=float, default=1.0)
    ap.add_argument("--a", type=float, default=0.8)
    ap.add_argument("--T", type=float, default=100.0)
    ap.add_argument("--n", type=int, nargs="*", default=[301, 601])
    args = ap.parse_args()
    s = solve_steady(args.m, args.mass)
    C1, C2 = concentration_constants(s)
    print(f"R={s.R:.6f} C1={C1:.6f} C2={C2:.6f}")
    rows = []
    for n in args.n:
        t0 = time.perf_counter()
        run = evolve(steady_initial(s, evolution_grid(s, n), args.a), args.T, checkpoints=50, reference=s)
        fit = convergence_rate(run, s)
        row = {"n": n, "lambda_fit": fit.lambda_fit, "r_squared": fit.r_squared, "lambda_theory": fit.lambda_theory}
        for name, C in (("C1", C1), ("C2", C2)):
            rep = comparison_monitor(run, Barrier("sub", args.a, C, s), Barrier("super", 1 / args.a, C, s))
            row[f"monitor_{name}"] = {"holds": rep.holds, "worst_lower": rep.worst_lower, "worst_upper": rep.worst_upper}
        row["seconds"] = time.perf_counter() - t0
        rows.append(row)
        print(f"n={n}: lambda_fit={fit.lambda_fit:.5f} (r2 {fit.r_squared:.4f}) theory={fit.lambda_theory:.5f} "
              f"| C1 barriers {'PASS' if row['monitor_C1']['holds'] else 'FAIL'} "
              f"({row['monitor_C1']['worst_lower']:.2e}) | C2 barriers "
              f"{'PASS' if row['monitor_C2']['holds'] else 'FAIL'} ({row['monitor_C2']['worst_lower']:.2e}) "
              f"| {row['seconds']:.1f}s")
    out = write_json(default_out_dir() / "convergence_run.json", {"m": args.m, "M": args.mass, "a": args.a, "T": args.T, "rows": rows})
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
