"""Sharp log-HLS constant on the truncated extremal family.

Prints the relative gap lhs - rhs on growing domains; it should shrink
towards zero if C(M) = M (1 + log pi - log M) is the sharp constant.
"""

import argparse

from ksground.rearrange import extremal_density, log_hls_check


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mass", type=float, default=1.0)
    ap.add_argument("--lam", type=float, default=1.0)
    args = ap.parse_args()
    print(f"{'r_trunc':>8} {'n':>7} {'lhs':>14} {'rhs':>14} {'gap_rel':>10}")
    for r_trunc, n in ((10.0, 4001), (100.0, 40001), (1000.0, 200001)):
        lhs, rhs, _ = log_hls_check(extremal_density(args.mass, args.lam, r_trunc, n))
        print(f"{r_trunc:8g} {n:7d} {lhs:14.8f} {rhs:14.8f} {(lhs - rhs) / abs(lhs):10.2e}")


if __name__ == "__main__":
    main()
