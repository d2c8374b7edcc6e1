import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solwave import soliton as sol
from solwave.evolution import (BlowupError, EvolutionConfig, ResolutionError, conserved, energy, evolve,
                               evolve_final, iter_evolve, mass, max_group_velocity, momentum, nonlinearity,
                               potential_density, reverse_time, SplitStepStepper, transform_gst, wraparound_time)
from solwave.grid import Grid, default_grid

OM = 0.125
GRID = default_grid(OM)
PHI = sol.phi(GRID.x, OM) + 0j


@pytest.mark.parametrize("kwargs", [dict(dt=0.1), dict(dt=0.0), dict(t_end=-1.0),
                                    dict(record_stride=0), dict(record_stride=1.5),
                                    dict(scheme="rk4"), dict(dt=0.003, t_end=1.0)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        EvolutionConfig(**kwargs)


def test_frames_and_times():
    cfg = EvolutionConfig(dt=0.01, t_end=1.0, record_stride=30)
    frames = evolve(PHI, cfg, GRID)
    t = [f[0] for f in frames]
    assert t[0] == 0.0 and t[-1] == pytest.approx(1.0)
    assert np.all(np.diff(t) > 0)
    assert len(frames) == 1 + math.ceil(100 / 30)


def test_input_untouched_and_frames_independent():
    psi = PHI.copy()
    frames = list(iter_evolve(psi, EvolutionConfig(dt=0.01, t_end=0.1, record_stride=5), GRID))
    assert np.array_equal(psi, PHI)
    assert not np.shares_memory(frames[1][1], frames[2][1])


def test_standing_wave_phase():
    out = evolve_final(PHI, 1e-3, 2.0, GRID)
    assert np.max(np.abs(out - np.exp(2j * OM) * PHI)) < 1e-8


def test_second_order_in_time():
    psi0 = PHI + 0.05 * np.exp(-GRID.x ** 2) * np.exp(1j * GRID.x)
    ref = evolve_final(psi0, 2.5e-4, 1.0, GRID)
    err = [np.max(np.abs(evolve_final(psi0, dt, 1.0, GRID) - ref)) for dt in (4e-3, 2e-3, 1e-3)]
    ratios = [err[0] / err[1], err[1] / err[2]]
    assert all(3.5 < r < 4.5 for r in ratios), ratios


def test_conserved_quantities_of_soliton():
    c = conserved(GRID, PHI)
    assert c.mass == pytest.approx(sol.mass(OM), rel=1e-13)
    assert abs(c.momentum) < 1e-14
    # E(phi) = int (phi')^2/2 - phi^4/4 + phi^6/6
    x = GRID.x
    dens = sol.dphi(x, OM) ** 2 / 2 - sol.phi(x, OM) ** 4 / 4 + sol.phi(x, OM) ** 6 / 6
    assert c.energy == pytest.approx(float(np.sum(dens) * GRID.spacing), rel=1e-12)


@given(beta=st.floats(-0.3, 0.3))
@settings(max_examples=20)
def test_boost_momentum(beta):
    psi = transform_gst(GRID, PHI, 0.0, beta)
    assert momentum(GRID, psi) == pytest.approx(-beta * mass(GRID, PHI), abs=1e-8)


@given(beta=st.floats(-0.5, 0.5), sigma=st.floats(-5, 5), gamma=st.floats(-3, 3))
@settings(max_examples=20)
def test_gst_preserves_mass(beta, sigma, gamma):
    psi = transform_gst(GRID, PHI, 0.7, beta, sigma, gamma)
    assert mass(GRID, psi) == pytest.approx(mass(GRID, PHI), rel=1e-12)


def test_reverse_time_round_trip():
    psi0 = PHI + 0.02 * np.exp(-(GRID.x - 1) ** 2)
    fwd = evolve_final(psi0, 2e-3, 2.0, GRID)
    back = reverse_time(evolve_final(reverse_time(fwd), 2e-3, 2.0, GRID))
    assert np.max(np.abs(back - psi0)) < 1e-10


def test_energy_drift_small():
    psi0 = PHI + 0.02 * np.exp(-(GRID.x / 2) ** 2)
    e0 = energy(GRID, psi0)
    e1 = energy(GRID, evolve_final(psi0, 1e-3, 2.0, GRID))
    assert abs(e1 - e0) / abs(e0) < 1e-9


def test_nonlinearity_and_potential():
    u = np.array([0.3 + 0.4j, 1.0, 0.0])
    m = np.abs(u) ** 2
    assert np.allclose(nonlinearity(u), (m - m ** 2) * u)
    assert np.allclose(potential_density(u), m ** 2 / 4 - m ** 3 / 6)


def test_resolution_guard():
    g = Grid(256, 40.0)
    rough = np.exp(-g.x ** 2) + 1e-2 * (-1.0) ** np.arange(256)
    with pytest.raises(ResolutionError):
        next(iter_evolve(rough, EvolutionConfig(dt=0.01, t_end=0.1), g))


def test_blowup_guard(monkeypatch):
    monkeypatch.setattr(SplitStepStepper, "advance", lambda self, psi, n: 3.0 * psi)
    with pytest.raises(BlowupError):
        evolve(PHI, EvolutionConfig(dt=0.01, t_end=0.1), GRID)


def test_wraparound_estimate():
    boosted = transform_gst(GRID, PHI, 0.0, 2 * np.pi * 10 / GRID.length)
    v = max_group_velocity(GRID, boosted)
    assert v > 2 * 2 * np.pi * 10 / GRID.length
    assert wraparound_time(GRID, boosted) == pytest.approx(GRID.length / (2 * v))
