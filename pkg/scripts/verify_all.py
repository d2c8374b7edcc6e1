"""Print the consolidated check table; exit status 1 if an explicit check fails."""

import argparse
import sys

from solwave.lab import VerifyConfig, format_table, verify_all


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--no-modes", action="store_true", help="skip the internal-mode scans")
    ap.add_argument("--phi-scale", type=float, default=1.0, help="fault injection on the profile")
    args = ap.parse_args()
    rep = verify_all(VerifyConfig(phi_scale=args.phi_scale, include_modes=not args.no_modes))
    print(format_table(rep["checks"]))
    failed = [c for c in rep["checks"] if c.explicit and not c.passed]
    for c in failed:
        print(f"failed: {c.name} (margin {c.margin:.4g})")
    sys.exit(0 if rep["passed"] else 1)


if __name__ == "__main__":
    main()
