"""Scan the explicit weight bounds over omega0 and locate where the quartic
ratio bound sup ratio <= 4 omega0 stops holding."""

import logging
import math

import numpy as np
from scipy.optimize import brentq

from solwave import soliton as sol
from solwave.grid import default_grid
from solwave.virial import WeightSpec, build_weights, lemma3_bounds, quartic_operator_check, quartic_ratio


def origin_ratio(om):
    a = sol.a_omega(om)
    return 6 * om / (a * (1 + a))


def main():
    # chi_A is always wider than these boxes; the truncation warning is expected
    logging.getLogger("solwave").setLevel(logging.ERROR)
    print(f"{'omega0':>8} {'sup P_B/w0':>11} {'sup R_B':>9} {'ratio/w0':>9} {'<=4w0':>6} {'op. lowest':>11}")
    for om in (0.02, 0.04, 0.05, 0.0625, 0.09375, 0.125):
        spec = WeightSpec(omega0=om)
        w = build_weights(spec, default_grid(om))
        l3 = lemma3_bounds(spec, weights=w)
        r = float(np.max(quartic_ratio(w)))
        op = quartic_operator_check(spec, n_points=768)
        print(f"{om:8.5f} {l3['sup_P_B']['value'] / om:11.5f} {l3['sup_R_B']['value']:9.5f} "
              f"{r / om:9.4f} {str(r <= 4 * om):>6} {op['lowest_eigenvalue']:11.3e}")
    # the ratio peaks at x = 0, where it equals 6 w / (a (1 + a))
    cross = brentq(lambda om: origin_ratio(om) - 4 * om, 1e-4, 0.125)
    print(f"ratio at x = 0 equals 4 omega0 at omega0 = {cross:.6f} "
          f"(a = {sol.a_omega(cross):.6f}, 1/16 = {1 / 16})")
    print(f"at omega0 = 1/8 the x = 0 ratio is {origin_ratio(0.125):.6f} vs 4 omega0 = 0.5,"
          f" a = {math.sqrt(1 / 3):.6f}")


if __name__ == "__main__":
    main()
