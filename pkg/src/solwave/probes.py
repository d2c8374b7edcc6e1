"""Fixed probe corpus used by the operator, inversion and inequality checks.

Probes are smooth real functions of x whose tails are below 1e-15 at
|x| = 110, so they behave as decaying functions on every default grid.
The random members are drawn from a fixed seed and are therefore part of
the versioned corpus.
"""

from __future__ import annotations

import numpy as np

from . import soliton as sol
from .grid import Grid

CORPUS_SEED = 20240611

PROBE_NAMES = (
    "gauss_w1",
    "gauss_w5",
    "gauss_w20",
    "modulated_w5_k1",
    "modulated_w3_k2",
    "phi_bump_shifted",
    "phi_squared_odd",
    "seeded_mixture",
)


def _gauss(x, width, centre=0.0):
    return np.exp(-((x - centre) / width) ** 2)


def _seeded_mixture(x):
    rng = np.random.default_rng(CORPUS_SEED)
    centres = rng.uniform(-8.0, 8.0, size=3)
    widths = rng.uniform(1.5, 4.0, size=3)
    amps = rng.uniform(-1.0, 1.0, size=3)
    return sum(a * _gauss(x, w, c) for a, w, c in zip(amps, widths, centres))


def probe(name: str, x, omega: float = 0.125) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if name == "gauss_w1":
        return _gauss(x, 1.0)
    if name == "gauss_w5":
        return _gauss(x, 5.0)
    if name == "gauss_w20":
        return _gauss(x, 20.0)
    if name == "modulated_w5_k1":
        return _gauss(x, 5.0) * np.cos(x)
    if name == "modulated_w3_k2":
        return _gauss(x, 3.0) * np.sin(2.0 * x + 0.3)
    if name == "phi_bump_shifted":
        return sol.phi(x - 3.0, omega) / sol.phi(np.array([0.0]), omega)[0]
    if name == "phi_squared_odd":
        p = sol.phi(x, omega)
        return x * p * p / (4 * omega)
    if name == "seeded_mixture":
        return _seeded_mixture(x)
    raise KeyError(f"unknown probe {name!r}; choose from {PROBE_NAMES}")


def corpus(grid: Grid, omega: float = 0.125) -> dict[str, np.ndarray]:
    """Name -> sampled probe, in the fixed corpus order."""
    return {name: probe(name, grid.x, omega) for name in PROBE_NAMES}


def complex_corpus(grid: Grid, omega: float = 0.125) -> dict[str, np.ndarray]:
    """Complex probes u1 + i u2 built from consecutive corpus members."""
    real = list(corpus(grid, omega).items())
    out = {}
    for k, (name, f) in enumerate(real):
        name2, g = real[(k + 1) % len(real)]
        out[f"{name}+i*{name2}"] = f + 1j * g
    return out
