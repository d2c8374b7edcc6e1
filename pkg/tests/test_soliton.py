import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from solwave import soliton as sol
from solwave.grid import Grid, default_grid, spectral_derivative

omegas = st.floats(0.01, 0.18)


def _phi_closed(x, om):
    a = math.sqrt(1 - 16 * om / 3)
    return np.sqrt(4 * om / (1 + a * np.cosh(2 * math.sqrt(om) * x)))


@given(om=omegas)
def test_phi_matches_closed_form(om):
    x = np.linspace(-30, 30, 601)
    assert np.max(np.abs(sol.phi(x, om) - _phi_closed(x, om))) < 1e-14


def test_phi_has_no_overflow_far_out():
    x = np.array([0.0, 1e3, 1e5])
    p = sol.phi(x, 0.125)
    assert np.all(np.isfinite(p)) and p[-1] == 0.0


@given(om=omegas)
def test_derivatives_are_consistent(om):
    x = np.linspace(-25, 25, 1001)
    h = 1e-5
    fd = (sol.phi(x + h, om) - sol.phi(x - h, om)) / (2 * h)
    assert np.max(np.abs(sol.dphi(x, om) - fd)) < 1e-8
    # closed-form recursion against the direct formulas
    assert np.max(np.abs(sol.phi_derivative(x, om, 2) - sol.d2phi(x, om))) < 1e-14
    assert np.max(np.abs(sol.phi_derivative(x, om, 1) - sol.dphi(x, om))) < 1e-14


@given(om=st.floats(0.02, 0.17))
def test_lambda_is_omega_derivative(om):
    x = np.linspace(-25, 25, 501)
    d = 1e-6 * om
    fd = om * (sol.phi(x, om + d) - sol.phi(x, om - d)) / (2 * d)
    assert np.max(np.abs(sol.lam(x, om) - fd)) < 1e-7


def test_lambda_identities_on_grid():
    om = 0.125
    g = default_grid(om)
    lam = sol.lambda_profile(om, g)
    assert np.max(np.abs(spectral_derivative(g, lam, 1) - sol.dlam(g.x, om))) < 1e-11
    assert np.max(np.abs(spectral_derivative(g, lam, 2) - sol.d2lam(g.x, om))) < 1e-11


def test_power_derivative_matches_spectral():
    om = 0.1
    g = default_grid(om)
    for power in (2, 4, 6):
        for order in (1, 2, 3):
            exact = sol.power_derivative(g.x, om, power, order)
            spec = spectral_derivative(g, sol.phi(g.x, om) ** power, order)
            assert np.max(np.abs(exact - spec)) < 1e-10


def test_a_omega_and_range():
    assert sol.a_omega(3 / 16) == 0.0
    assert sol.a_omega(0.125) == pytest.approx(math.sqrt(1 / 3))
    for bad in (0.0, -0.1, 0.2, float("nan")):
        with pytest.raises(ValueError):
            sol.a_omega(bad)
    with pytest.raises(ValueError):
        sol.SolitonParams(3 / 16)
    with pytest.raises(ValueError):
        sol.FullParams(0.1, beta=float("inf"))


@given(om=st.floats(0.02, 0.125))
def test_mass_closed_form(om):
    # int 4w/(1 + a cosh 2 sqrt(w) x) dx = 2 sqrt(3) artanh(sqrt((1 - a)/(1 + a)))
    a = math.sqrt(1 - 16 * om / 3)
    exact = 2 * math.sqrt(3) * math.atanh(math.sqrt((1 - a) / (1 + a)))
    assert sol.mass(om) == pytest.approx(exact, rel=1e-12)
    numeric, _ = quad(lambda x: 2 * _phi_closed(x, om) ** 2, 0, 60 / math.sqrt(om))
    assert numeric == pytest.approx(exact, rel=1e-9)


def test_profile_residual_detects_scaling():
    g = default_grid(0.125)
    assert sol.profile_residual(0.125, g) < 1e-11
    assert sol.profile_residual(0.125, g, scale=1.01) > 1e-4


def test_narrow_grid_warns(caplog):
    caplog.set_level("WARNING", logger="solwave")
    sol.phi_profile(0.125, Grid(256, 40.0))
    assert "too small" in caplog.text


def test_lemma1_constants_report():
    rep = sol.lemma1_constants([1 / 16, 1 / 8], n_points=2048)
    assert len(rep["rows"]) == 2
    assert all(np.isfinite(rep["C_phi"])) and all(np.isfinite(rep["C_lambda"]))
    assert rep["c_lower"] > 0
    with pytest.raises(ValueError):
        sol.lemma1_constants([0.15])
