import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solwave import modulation as md
from solwave import soliton as sol
from solwave.evolution import EvolutionConfig, evolve, transform_gst
from solwave.grid import default_grid, norm

OM = 0.125
GRID = default_grid(OM)
P = sol.phi(GRID.x, OM) + 0j


def _moved(beta, sigma, gamma, field=P):
    return transform_gst(GRID, field, 0.0, beta, sigma, gamma)


@settings(max_examples=10, deadline=None)
@given(beta=st.floats(-0.1, 0.1), sigma=st.floats(-3, 3), gamma=st.floats(-3, 3))
def test_exact_soliton_recovers_group_parameters(beta, sigma, gamma):
    f = md.decompose(GRID, _moved(beta, sigma, gamma))
    # the boost phase is applied after the shift, so gamma picks up beta*sigma
    g = math.remainder(gamma + beta * sigma - f.params.gamma, 2 * math.pi)
    assert abs(g) < 1e-10
    assert abs(f.params.beta - beta) < 1e-10 and abs(f.params.sigma - sigma) < 1e-10
    assert abs(f.params.omega - OM) < 1e-10
    assert norm(GRID, f.u) < 1e-10


def test_perturbed_soliton_is_orthogonal():
    pert = 0.01 * np.exp(-GRID.x ** 2)
    f = md.decompose(GRID, P + pert)
    assert np.max(f.ortho_residuals) < 1e-12
    assert 0.1 * norm(GRID, pert) < norm(GRID, f.u) < 2 * norm(GRID, pert)


def test_equivariance_under_group_action():
    psi = P + 0.01 * np.exp(-(GRID.x - 1) ** 2) * np.exp(0.3j * GRID.x)
    base = md.decompose(GRID, psi).params
    b, s, g = 0.04, 2.0, 0.5
    moved = md.decompose(GRID, _moved(b, s, g, psi)).params
    assert moved.omega == pytest.approx(base.omega, abs=1e-10)
    assert moved.beta == pytest.approx(base.beta + b, abs=1e-10)
    assert moved.sigma == pytest.approx(base.sigma + s, abs=1e-10)
    assert math.remainder(moved.gamma - (base.gamma + g + b * (base.sigma + s)), 2 * math.pi) == \
        pytest.approx(0.0, abs=1e-9)


def test_reconstruction_and_idempotence():
    psi = P + 0.02 * np.exp(-(GRID.x / 3) ** 2) * np.exp(-0.2j * GRID.x)
    f = md.decompose(GRID, psi)
    rebuilt = md.reconstruct(GRID, f.params, f.u)
    assert np.max(np.abs(rebuilt - psi)) < 1e-12
    again = md.decompose(GRID, rebuilt, f.params)
    assert np.max(np.abs(again.params.as_array() - f.params.as_array())) < 1e-12
    assert np.max(np.abs(md.residual_field(GRID, psi, f.params) - f.u)) < 1e-14


def test_linearization_matrix_is_well_conditioned():
    J = md.linearization_matrix(GRID, OM)
    assert np.isfinite(np.linalg.cond(J)) and np.linalg.cond(J) < 1e6


def test_initial_guess_from_peak():
    g = md.initial_guess(GRID, _moved(0.0, 2.0, 0.3))
    # the peak is sampled at the nearest node, so omega is only O(h^2) accurate
    assert g.omega == pytest.approx(OM, rel=1e-4)
    assert abs(g.sigma - 2.0) <= GRID.spacing


def test_decompose_errors():
    far = np.exp(-(GRID.x - 40) ** 2) * 0.01 + 0j
    with pytest.raises(md.ModulationError):
        md.decompose(GRID, far, sol.FullParams(omega=OM), max_iter=3)
    with pytest.raises(md.ModulationError) as err:
        md.decompose(GRID, P + 0.3 * np.exp(-GRID.x ** 2), max_iter=1)
    assert err.value.residuals is not None


def test_trajectory_unwraps_gamma():
    cfg = EvolutionConfig(dt=0.01, t_end=60.0, record_stride=100)
    frames = list(md.decompose_trajectory(GRID, evolve(P, cfg, GRID)))
    gamma = np.array([f.params.gamma for f in frames])
    t = np.array([f.t for f in frames])
    # omega * 60 = 7.5 > 2 pi, so a wrapped phase would jump by 2 pi; the
    # remaining offset is the O(dt^2) phase error of the stepper
    assert np.max(np.abs(gamma - OM * t)) < 1e-5


def test_rates_of_exact_solitons():
    cfg = EvolutionConfig(dt=1e-3, t_end=1.0, record_stride=100)
    beta = 0.05
    frames = list(md.decompose_trajectory(GRID, evolve(_moved(beta, 0.0, 0.0), cfg, GRID)))
    rep = md.rate_diagnostics(GRID, frames)
    assert np.max(np.abs(rep.beta_dot)) < 1e-8 and np.max(np.abs(rep.omega_dot)) < 1e-8
    assert np.max(np.abs(rep.sigma_dot - 2 * beta)) < 1e-6
    # gamma_dot of exp(i(beta x + (w - beta^2) t)) phi(x - 2 beta t) in this convention
    assert np.max(np.abs(rep.gamma_dot - (OM + beta ** 2))) < 1e-8


def test_rate_report_validation_and_constant():
    t = np.arange(6) * 0.1
    P_ = np.tile([0.0, 0.0, 0.0, OM], (6, 1))
    P_[:, 0] = 1e-3 * t
    P_[:, 2] = OM * t
    rep = md.rate_report(t, P_, np.array([0.0, 1, 1, 1, 1, 1]) * 1e-4)
    assert np.isnan(rep.ratios["beta_dot/sqrt(w)"][0])
    assert rep.constant() == pytest.approx(1e-3 / math.sqrt(OM) / 1e-4, rel=1e-3)
    assert math.isnan(rep.constant(t_min=10.0))
    with pytest.raises(ValueError):
        md.rate_report(t[:4], P_[:4], np.ones(4))
    with pytest.raises(ValueError):
        md.rate_report(t ** 2, P_, np.ones(6))


def test_weighted_u_norm():
    u = np.exp(-GRID.x ** 2)
    w = md.weighted_u_norm(GRID, u, OM)
    assert 0 < w < math.sqrt(OM) * norm(GRID, u) ** 2
    assert md.weighted_u_norm(GRID, 2 * u, OM) == pytest.approx(4 * w)


def test_u_equation_terms_vanish_on_soliton_and_real_q2():
    f = md.decompose(GRID, P)
    terms = md.u_equation_terms(GRID, f, np.array([0.0, 0.0, OM, 0.0]))
    for name in ("theta1", "theta2", "m1", "m2", "q1", "q2"):
        assert np.max(np.abs(getattr(terms, name))) < 1e-9
    real = md.ModulationFrame(0.0, f.params, 0.01 * np.exp(-GRID.x ** 2) + 0j, f.ortho_residuals)
    assert np.max(np.abs(md.u_equation_terms(GRID, real, np.zeros(4)).q2)) == 0.0
    with pytest.raises(ValueError):
        md.u_equation_terms(GRID, f, np.zeros(4), phase_coefficient="other")


def test_u_equation_phase_conventions_differ_with_drift():
    f = md.decompose(GRID, _moved(0.05, 0.0, 0.0))
    rates = np.array([0.0, 0.2, OM, 0.0])       # sigma_dot != 2 beta
    a = md.u_equation_terms(GRID, f, rates, "exact").theta1
    b = md.u_equation_terms(GRID, f, rates, "printed").theta1
    expected = -f.params.beta * (rates[1] - 2 * f.params.beta) * sol.phi(GRID.x, f.params.omega)
    assert np.max(np.abs((a - b) - expected)) < 1e-14


def test_u_equation_residual_on_soliton_and_run():
    # the exact-soliton residual is the stepper's O(dt^2) profile error
    fine = EvolutionConfig(dt=5e-4, t_end=0.1, record_stride=20)
    exact = list(md.decompose_trajectory(GRID, evolve(P, fine, GRID)))
    assert md.u_equation_residual(GRID, exact).max_sup < 1e-9
    cfg = EvolutionConfig(dt=2e-3, t_end=0.2, record_stride=5)
    psi0 = P + 0.01 * np.exp(-GRID.x ** 2) * np.exp(0.5j * GRID.x)
    run = list(md.decompose_trajectory(GRID, evolve(psi0, cfg, GRID)))
    rep = md.u_equation_residual(GRID, run)
    assert rep.max_sup < 1e-2 * np.max(rep.dudt_scale)
    with pytest.raises(ValueError):
        md.u_equation_residual(GRID, run[:3])
