"""Grid and time-step refinement: L+ / L- eigenvalues against matrix size and
the u-equation residual against dt."""

import numpy as np

from solwave import modulation as md
from solwave import soliton as sol
from solwave.evolution import EvolutionConfig, evolve
from solwave.grid import default_grid
from solwave.spectral import spectrum


def spectra(omega):
    print(f"omega = {omega}")
    prev = None
    for n in (256, 512, 1024, 2048):
        ev = spectrum("Lplus", omega, k=3, n_points=n).eigenvalues
        move = "" if prev is None else f"  movement {np.max(np.abs(ev - prev)):.2e}"
        print(f"  n = {n:5d}  L+ lowest {ev[0]:.12f}  kernel {ev[1]:+.2e}{move}")
        prev = ev


def u_equation(omega=0.125, t_end=0.2, stride=5):
    g = default_grid(omega)
    psi0 = sol.phi(g.x, omega) + 0.01 * np.exp(-g.x ** 2) * np.exp(0.5j * g.x)
    errs = []
    for dt in (4e-3, 2e-3, 1e-3, 5e-4):
        frames = list(md.decompose_trajectory(g, evolve(psi0, EvolutionConfig(dt, t_end, stride), g)))
        errs.append(md.u_equation_residual(g, frames).max_sup)
        ratio = "" if len(errs) == 1 else f"  ratio {errs[-2] / errs[-1]:.3f}"
        print(f"  dt = {dt:.0e}  weighted sup residual {errs[-1]:.3e}{ratio}")


if __name__ == "__main__":
    for om in (1 / 16, 1 / 8):
        spectra(om)
    print("u-equation residual, stride held fixed")
    u_equation()
