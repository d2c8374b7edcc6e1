"""Run the long-time perturbation experiment and print the headline numbers.

    python3 scripts/long_run.py --config scripts/default.ini --out runs/default
"""

import argparse
import dataclasses
import json
from pathlib import Path

from solwave.lab import load_config, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(Path(__file__).with_name("default.ini")))
    ap.add_argument("--out", default="runs/default")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--t-end", type=float, help="override the final time")
    args = ap.parse_args()

    cfg = load_config(args.config, args.seed)
    if args.t_end is not None:
        cfg = dataclasses.replace(cfg, evolution=dataclasses.replace(cfg.evolution, t_end=args.t_end))
    cfg = dataclasses.replace(cfg, out_dir=args.out)
    _, s = run_experiment(cfg)

    decay = s["weighted_norm_integrals"]["omega0_rho2_u_sq"]
    print(f"T = {s['T']:g}, {s['n_frames']} frames, {s['runtime_s']:.1f} s")
    print(f"omega0 |rho^2 u|^2 integral: early {decay['early']:.3e}, late {decay['late']:.3e}"
          f"  -> decay {'PASS' if s['decay_passed'] else 'FAIL'}")
    print(f"|omega(T) - omega(T-10)| = {s['omega_T_minus_omega_T10']:.2e}, "
          f"|beta(T) - beta(T-10)| = {s['beta_T_minus_beta_T10']:.2e}")
    for key in ("coercivity", "coercivity_1_50"):
        c = s[key]
        print(f"{key}: max {c['max']:.4g}, median {c['median']:.4g}, max < 2 median: {c['bounded']}")
    print(f"modulation rate constant {s['modulation_rate_constant']:.4g}; "
          f"orbital multiple {s['orbital_multiple']:.3g}")
    print(json.dumps(s["conserved_relative_drift"]))
    print(f"output in {args.out}")


if __name__ == "__main__":
    main()
