"""Command-line entry point: ``solwave <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import soliton as sol
from .grid import Grid, default_grid, norm
from .lab import (ExperimentAborted, ExperimentConfig, VerifyConfig, _jsonable, format_table,
                  load_config, read_trajectory, run_experiment, verify_all, write_trajectory)
from .modulation import decompose_trajectory
from .operators import IDENTITY_THRESHOLDS, identity_residuals
from .probes import corpus
from .spectral import internal_mode_scan, spectrum
from .virial import WeightSpec, bounds_report


def _grid_arg(text):
    n, length = text.split(",")
    return Grid(int(n), float(length))


def _print_json(obj, out=None):
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _config(args):
    if getattr(args, "config", None):
        return load_config(args.config, getattr(args, "seed", None))
    cfg = ExperimentConfig()
    if getattr(args, "seed", None) is not None:
        cfg = dataclasses.replace(cfg, perturbation=dataclasses.replace(cfg.perturbation, seed=args.seed))
    return cfg


def cmd_soliton(args):
    grid = args.grid or default_grid(args.omega)
    x = grid.x
    cols = (x, sol.phi(x, args.omega), sol.dphi(x, args.omega), sol.lam(x, args.omega))
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("x", "phi", "dphi", "Lambda"))
    for row in zip(*cols):
        w.writerow([repr(float(v)) for v in row])
    if args.out:
        fh.close()
        res = sol.profile_residual(args.omega, grid)
        print(f"profile residual {res:.3e}; wrote {args.out}")
    return 0


def cmd_identities(args):
    grid = default_grid(args.omega)
    rep = identity_residuals(args.omega, list(corpus(grid, args.omega).values()), grid)
    width = max(map(len, rep["residuals"]))
    for k, v in rep["residuals"].items():
        tag = "ok" if rep["passed"][k] else "FAIL"
        print(f"{k:<{width}}  {v:.3e}  (< {IDENTITY_THRESHOLDS[k]:.0e})  {tag}")
    return 0 if all(rep["passed"].values()) else 1


def cmd_spectrum(args):
    rep = spectrum(args.operator, args.omega, k=args.count, n_points=args.n_points,
                   domain_half_width=args.half_width, method=args.method, boundary=args.boundary)
    _print_json({"operator": rep.operator.value, "omega": rep.omega,
                 "eigenvalues": rep.eigenvalues.tolist(), "negative_count": rep.negative_count,
                 "kernel_alignment": rep.kernel_alignment, "zero_tol": rep.zero_tol}, args.out)
    return 0


def cmd_modes(args):
    rep = internal_mode_scan(args.omega, n_points=args.n_points)
    out = dataclasses.asdict(rep)
    out["persistent_count"] = rep.persistent_count
    out["inconclusive_count"] = rep.inconclusive_count
    _print_json(out, args.out)
    return 0 if rep.persistent_count == 0 else 1


def cmd_evolve(args):
    cfg = _config(args)
    out = args.out or cfg.out_dir or "trajectory"
    header = write_trajectory(cfg, out)
    print(f"wrote {header['frame_count']} frames to {out}")
    return 0


def cmd_modulate(args):
    grid, header, frames = read_trajectory(args.trajectory)
    rho_w = None
    out = Path(args.out) if args.out else Path(args.trajectory) / "modulation.csv"
    guess = sol.FullParams(float(header.get("omega0", 0.125)))
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(("t", "beta", "sigma", "gamma", "omega", "ortho_phi", "ortho_xphi",
                    "ortho_iLambda", "ortho_idphi", "norm_u", "norm_rho2_u"))
        for f in decompose_trajectory(grid, frames, guess):
            if rho_w is None:
                rho_w = 1.0 / np.cosh(np.sqrt(guess.omega) * grid.x / 10) ** 2
            p = f.params
            row = [f.t, p.beta, p.sigma, p.gamma, p.omega, *f.ortho_residuals,
                   norm(grid, f.u), norm(grid, rho_w * f.u)]
            w.writerow([repr(float(v)) for v in row])
    print(f"wrote {out}")
    return 0


def cmd_bounds(args):
    rep = bounds_report(WeightSpec(omega0=args.omega0, A=args.A, B=args.B, alpha=args.alpha))
    _print_json(rep, args.out)
    return 0 if rep["all_explicit_passed"] else 1


def cmd_run(args):
    cfg = _config(args)
    out = args.out or cfg.out_dir or "run"
    cfg = dataclasses.replace(cfg, out_dir=out)
    try:
        _, summary = run_experiment(cfg)
    except ExperimentAborted as exc:
        print(f"aborted: {exc}; partial output in {out}", file=sys.stderr)
        return 2
    _print_json(summary)
    return 0 if summary["decay_passed"] and summary["tail_converged"] else 1


def cmd_verify_all(args):
    cfg = VerifyConfig(weights=WeightSpec(omega0=args.omega0, A=args.A, B=args.B, alpha=args.alpha),
                       phi_scale=args.phi_scale, include_modes=not args.no_modes)
    rep = verify_all(cfg)
    print(format_table(rep["checks"]))
    failed = [c.name for c in rep["checks"] if c.explicit and not c.passed]
    print(f"\n{len(failed)} explicit-constant check(s) failed" if failed else "\nall explicit-constant checks passed")
    if args.out:
        _print_json({"checks": [c.__dict__ for c in rep["checks"]], "passed": rep["passed"]}, args.out)
    return 0 if rep["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="solwave", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("soliton", help="tabulate x, phi, phi', Lambda as CSV")
    p.add_argument("--omega", type=float, default=0.125)
    p.add_argument("--grid", type=_grid_arg, default=None, help="N,L")
    p.add_argument("--out")
    p.set_defaults(func=cmd_soliton)

    p = sub.add_parser("identities", help="operator identity residual table")
    p.add_argument("--omega", type=float, default=0.125)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("spectrum", help="lowest eigenvalues of L+, L-, M+ or M-")
    p.add_argument("--operator", required=True, choices=("Lplus", "Lminus", "Mplus", "Mminus"))
    p.add_argument("--omega", type=float, default=0.125)
    p.add_argument("--count", type=int, default=6)
    p.add_argument("--n-points", type=int, default=1024)
    p.add_argument("--half-width", type=float, default=None)
    p.add_argument("--method", default="sine", choices=("sine", "fd2"))
    p.add_argument("--boundary", default="dirichlet", choices=("dirichlet", "periodic"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("modes", help="internal-mode scan of L+ L-")
    p.add_argument("--omega", type=float, default=0.125)
    p.add_argument("--n-points", type=int, default=512)
    p.add_argument("--out")
    p.set_defaults(func=cmd_modes)

    for name, func, hlp in (("evolve", cmd_evolve, "evolve and dump a trajectory"),
                            ("run", cmd_run, "full perturbation experiment")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("--config")
        p.add_argument("--out")
        p.add_argument("--seed", type=int)
        p.set_defaults(func=func)

    p = sub.add_parser("modulate", help="decompose a dumped trajectory")
    p.add_argument("--trajectory", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_modulate)

    for name, func, hlp in (("bounds", cmd_bounds, "virial weight and inequality report"),
                            ("verify-all", cmd_verify_all, "consolidated check battery")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("--omega0", type=float, default=0.125)
        p.add_argument("--B", type=float, default=10.0)
        p.add_argument("--A", type=float, default=1000.0)
        p.add_argument("--alpha", type=float, default=0.01)
        p.add_argument("--out")
        if name == "verify-all":
            p.add_argument("--phi-scale", type=float, default=1.0,
                           help="multiply the sampled profile (fault injection)")
            p.add_argument("--no-modes", action="store_true")
        p.set_defaults(func=func)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return int(args.func(args) or 0)


if __name__ == "__main__":
    sys.exit(main())
