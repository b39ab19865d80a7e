"""Command line entry point: ``ksground {steady,energy,evolve,verify}``.

Exit codes: 0 success, 1 usage or I/O problem, 2 solver failure,
3 verification failure. Output goes under ``--out`` (default: the
``KSGROUND_OUT`` environment variable, else ``./ksground_out``).
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .masspde import EvolutionError

log = logging.getLogger("ksground")

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    m: float | None = None
    M: float | None = None
    out: Path = field(default_factory=io.default_out_dir)
    n_support: int = 2048
    tol: float = 1e-10
    seed: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.m is not None and not (math.isfinite(self.m) and self.m > 1):
            raise UsageError(f"--m must be a finite number > 1 (got {self.m})")
        if self.M is not None and not (math.isfinite(self.M) and self.M > 0):
            raise UsageError(f"--mass must be a finite number > 0 (got {self.M})")
        if self.n_support < 16:
            raise UsageError("--n-support must be at least 16")
        if not self.tol > 0:
            raise UsageError("--tol must be positive")


def _parser() -> _Parser:
    p = _Parser(prog="ksground", description="Radial ground states of 2D Keller-Segel with nonlinear diffusion.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    st = sub.add_parser("steady", help="solve for the steady state of given mass")
    st.add_argument("--m", type=float, required=True, help="diffusion exponent m > 1")
    st.add_argument("--mass", type=float, required=True)
    st.add_argument("--n-support", type=int, default=2048, help="grid nodes across the support")
    st.add_argument("--tol", type=float, default=1e-10, help="relative tolerance on the mass")
    st.add_argument("--out", type=Path, default=None)
    st.add_argument("--name", default=None, help="file stem (default steady_m<m>_M<M>)")

    en = sub.add_parser("energy", help="energy report for a radial profile CSV")
    en.add_argument("profile", type=Path)
    en.add_argument("--m", type=float, required=True)
    en.add_argument("--support", type=float, default=None, help="support radius (overrides the sidecar)")
    en.add_argument("--out", type=Path, default=None, help="report path (default: print only)")

    ev = sub.add_parser("evolve", help="run the mass-function evolution")
    ev.add_argument("--m", type=float, required=True)
    ev.add_argument("--mass", type=float, default=None, help="total mass (ignored for file: init)")
    ev.add_argument("--init", default="steady", help="steady | scaled:a | disk:R | file:path")
    ev.add_argument("--T", type=float, default=1.0)
    ev.add_argument("--checkpoints", type=int, default=10)
    ev.add_argument("--n", type=int, default=601, help="nodes on [0, 3 R]")
    ev.add_argument("--out", type=Path, default=None)

    ve = sub.add_parser("verify", help="run a verification suite")
    ve.add_argument("--suite", required=True)
    ve.add_argument("--seed", type=int, default=0)
    ve.add_argument("--out", type=Path, default=None)
    return p


def _out(args) -> Path:
    return args.out if getattr(args, "out", None) is not None else io.default_out_dir()


def cmd_steady(args) -> int:
    from .potential import el_residual
    from .steady import solve_steady

    cfg = RunConfig("steady", args.m, args.mass, _out(args), args.n_support, args.tol)
    s = solve_steady(cfg.m, cfg.M, tol=cfg.tol, n_support=cfg.n_support)
    stem = args.name or f"steady_m{cfg.m:g}_M{cfg.M:g}"
    csv_path, side = io.write_profile(cfg.out / f"{stem}.csv", s)
    inner, outer = el_residual(s)
    print(f"R = {s.R:.10g}")
    print(f"D = {s.D:.10g}")
    print(f"theta_c = {s.theta_c:.10g}")
    print(f"EL residual: inner = {inner:.3e}, outer = {outer:.3e}")
    print(f"wrote {csv_path} and {side}")
    return EXIT_OK


def _energy_report(rho, m: float) -> dict:
    from .potential import free_energy, newtonian_potential_radial

    e = free_energy(rho, m)
    rep = e.as_dict()
    M, R = rho.mass, rho.support_radius()
    rep.update({"M": M, "m": m, "R": R})
    pot = newtonian_potential_radial(rho)
    inner = rho.nodes <= 0.9 * R
    xi = m / (m - 1.0) * rho.values[inner] ** (m - 1.0) - pot.values[inner]
    rep["el_inner_residual"] = float(np.max(np.abs(xi - e.D_formula))) if inner.any() else 0.0
    gap = abs(e.D_formula - e.D_profile)
    rep["D_gap_rel"] = gap / abs(e.D_formula) if e.D_formula != 0 else math.inf
    rep["D_check"] = "PASS" if gap <= 1e-3 * abs(e.D_formula) else "FAIL"
    on = rho.values[rho.nodes < R]
    if on.size and np.ptp(on) <= 1e-12 * max(on.max(), 1e-300):
        c = float(on[0])
        rep["disk_closed_form"] = {
            "H": c**m * math.pi * R * R / (m - 1.0),
            "W": M * M / (4 * math.pi) * (math.log(R) - 0.25),
        }
    return rep


def cmd_energy(args) -> int:
    RunConfig("energy", args.m)
    rho = io.read_radial(args.profile, support=args.support, m=args.m)
    if rho.mass <= 0:
        raise io.FormatError(f"{args.profile}: profile has zero mass")
    text = io.dumps(_energy_report(rho, args.m))
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def _parse_init(spec: str):
    kind, _, arg = spec.partition(":")
    if kind == "steady" and not arg:
        return "steady", None
    if kind in ("scaled", "disk"):
        try:
            val = float(arg)
        except ValueError:
            raise UsageError(f"--init {kind}: needs a number, got {arg!r}") from None
        if not val > 0:
            raise UsageError(f"--init {kind}: value must be positive")
        return kind, val
    if kind == "file" and arg:
        return "file", Path(arg)
    raise UsageError(f"unknown --init {spec!r}; use steady, scaled:a, disk:R or file:path")


def cmd_evolve(args) -> int:
    from .masspde import (
        Barrier, comparison_monitor, concentration_constants, convergence_rate,
        density_to_mass, disk_initial, evolution_grid, evolve, steady_initial,
    )
    from .radial import RadialGrid
    from .steady import solve_steady

    kind, val = _parse_init(args.init)
    if args.T <= 0 or args.checkpoints < 1 or args.n < 11:
        raise UsageError("--T must be positive, --checkpoints >= 1 and --n >= 11")
    if kind == "file":
        rho_in = io.read_radial(val)
        M = rho_in.mass
    else:
        if args.mass is None:
            raise UsageError("--mass is required unless --init file:...")
        M = args.mass
    cfg = RunConfig("evolve", args.m, M, _out(args), extra={"init": args.init, "T": args.T})
    s = solve_steady(cfg.m, cfg.M)
    C1, C2 = concentration_constants(s)
    if kind == "steady":
        grid = evolution_grid(s, args.n)
        state = steady_initial(s, grid)
    elif kind == "scaled":
        factor = max(3.0, 1.2 / val)
        grid = evolution_grid(s, args.n, factor)
        state = steady_initial(s, grid, val)
    elif kind == "disk":
        grid = evolution_grid(s, args.n, max(3.0, 1.2 * val / s.R))
        state = disk_initial(cfg.m, M, val, grid)
    else:
        r_top = max(3.0 * s.R, 1.2 * rho_in.support_radius())
        grid = RadialGrid.covering(r_top, args.n)
        state = density_to_mass(rho_in, cfg.m, grid)

    run = evolve(state, args.T, checkpoints=args.checkpoints, reference=s)
    fit = convergence_rate(run, s)
    run_dir = cfg.out
    names = []
    for i, st in enumerate(run.states):
        p = io.write_checkpoint(run_dir / f"checkpoint_{i:04d}.csv", st)
        names.append(p.name)
    manifest = {
        "m": cfg.m,
        "M": cfg.M,
        "init": args.init,
        "T": args.T,
        "n": args.n,
        "R_max": grid.r_max,
        "dt_policy": {"diffusion": 0.2, "cfl": 0.5, "rule": "dt = min(0.2 dr^2/(m max rho^(m-1)), 0.5 dr/max|v|)"},
        "checkpoints": [float(t) for t in run.times],
        "files": names,
        "sup_distances": list(run.distances),
        "lambda_fit": fit.lambda_fit,
        "lambda_theory": fit.lambda_theory,
        "r_squared": fit.r_squared,
        "fit_verdict": fit.verdict,
        "C1": C1,
        "C2": C2,
        "steady_R": s.R,
    }
    status = EXIT_OK
    if kind == "scaled":
        a = val
        lo, hi = (a, 1.0 / a) if a <= 1 else (1.0 / a, a)
        rep = comparison_monitor(run, Barrier("sub", lo, C1, s), Barrier("super", hi, C1, s))
        manifest["monitor"] = {
            "holds": rep.holds,
            "worst_lower": rep.worst_lower,
            "worst_upper": rep.worst_upper,
            "tol": rep.tol,
            "initial_order": list(rep.initial_order),
        }
        print(f"comparison monitor: {'PASS' if rep.holds else 'FAIL'} "
              f"(worst margins {rep.worst_lower:.3e}, {rep.worst_upper:.3e}; tol {rep.tol:.1e})")
        if not rep.holds:
            status = EXIT_VERIFY
    io.write_json(run_dir / "manifest.json", manifest)
    d = run.distances
    print(f"sup distance: start {d[0]:.3e}, end {d[-1]:.3e}, max {max(d):.3e}")
    print(f"lambda_fit = {fit.lambda_fit:.4g} ({fit.verdict}, r^2 = {fit.r_squared:.4f}), "
          f"lambda_theory = {fit.lambda_theory:.4g}")
    print(f"wrote {len(names)} checkpoints and manifest.json to {run_dir}")
    return status


def cmd_verify(args) -> int:
    from .suites import SUITES, run_suite

    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    res = run_suite(args.suite, args.seed)
    path = (args.out if args.out is not None else io.default_out_dir() / f"verify_{args.suite}_seed{args.seed}.json")
    io.write_json(path, res)
    n_pass = sum(c["holds"] for c in res["cases"])
    print(f"{args.suite}: {n_pass}/{len(res['cases'])} cases pass -> {'PASS' if res['all_pass'] else 'FAIL'}")
    print(f"wrote {path}")
    return EXIT_OK if res["all_pass"] else EXIT_VERIFY


COMMANDS = {"steady": cmd_steady, "energy": cmd_energy, "evolve": cmd_evolve, "verify": cmd_verify}


def main(argv=None) -> int:
    from .steady import SolverError, SupportExceedsDomain

    try:
        args = _parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (io.FormatError, OSError) as exc:
        print(f"input/output error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, SupportExceedsDomain, EvolutionError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
