import numpy as np
import pytest

from solwave import soliton as sol
from solwave import spectral as sp
from solwave.grid import default_grid
from solwave.operators import operators_for

OM = 0.125
GRID = default_grid(OM)
OPS = operators_for(OM, GRID)


@pytest.mark.parametrize("method", ["sine", "fd2"])
def test_dirichlet_laplacian_spectrum(method):
    W, n = 10.0, 200
    ev = np.linalg.eigvalsh(sp.laplacian_matrix(W, n, method))
    exact = (np.pi * np.arange(1, 6) / (2 * W)) ** 2
    tol = 1e-10 if method == "sine" else 1e-3
    assert np.max(np.abs(ev[:5] - exact) / exact) < tol


def test_periodic_laplacian_spectrum():
    L, n = 20.0, 128
    ev = np.linalg.eigvalsh(sp.periodic_laplacian_matrix(L, n))
    assert abs(ev[0]) < 1e-10
    assert ev[1] == pytest.approx((2 * np.pi / L) ** 2, rel=1e-10)


def test_spectrum_report_fields():
    rep = sp.spectrum("Lminus", OM, k=3)
    assert np.all(np.diff(rep.eigenvalues) >= 0)
    assert rep.eigenvectors.shape[1] == 3
    assert rep.negative_count == 0
    assert 0.9999 < rep.kernel_alignment <= 1.0
    assert np.isnan(sp.spectrum("Mplus", OM, k=2).kernel_alignment)


def test_L_plus_kernel_and_negative_direction():
    rep = sp.spectrum("Lplus", OM, k=3)
    assert rep.negative_count == 1
    assert abs(rep.eigenvalues[1]) < 1e-6
    assert rep.kernel_alignment > 0.9999


@pytest.mark.parametrize("boundary", ["dirichlet", "periodic"])
def test_boundary_choice_does_not_move_bound_states(boundary):
    ref = sp.spectrum("Mplus", OM, k=1)
    rep = sp.spectrum("Mplus", OM, k=1, boundary=boundary)
    assert abs(rep.eigenvalues[0] - ref.eigenvalues[0]) < 1e-6
    # M+ = S S* is nonnegative and its bound state sits below omega
    assert 0 < rep.eigenvalues[0] < OM


def test_spectrum_rejects_small_box_and_huge_matrix():
    with pytest.raises(ValueError):
        sp.spectrum("Lplus", OM, domain_half_width=10.0)
    with pytest.raises(ValueError):
        sp.spectrum("Lplus", OM, n_points=8192)


def test_internal_mode_scan_clean_operator():
    rep = sp.internal_mode_scan(OM, n_points=384)
    assert rep.persistent_count == 0 and rep.inconclusive_count == 0
    assert rep.zero_multiplicity == 2
    assert rep.lowest_continuum >= rep.gap_edge


@pytest.mark.parametrize("extra", [lambda x: 0.02 * np.exp(-(x / 3) ** 2),
                                   lambda x: -0.03 * np.exp(-(x / 10) ** 2)])
def test_internal_mode_scan_detects_planted_mode(extra):
    rep = sp.internal_mode_scan(OM, n_points=384, lplus_extra=extra)
    assert rep.persistent_count >= 1
    assert all(0 < e.value < OM ** 2 for e in rep.gap_eigenvalues)


def test_internal_mode_scan_range():
    with pytest.raises(ValueError):
        sp.internal_mode_scan(0.15)


@pytest.mark.parametrize("om", [1 / 16, 1 / 8])
def test_homogeneous_solutions(om):
    g = default_grid(om)
    hs = sp.homogeneous_for(om, g)
    assert max(hs.wronskian_residuals.values()) < 1e-8
    assert np.max(np.abs(hs.G - g.reflect(hs.G))[1:]) == 0.0
    band = (g.x > 20 / np.sqrt(om)) & (g.x < 35 / np.sqrt(om))
    slope = np.polyfit(g.x[band], np.log(np.abs(hs.H1[band])), 1)[0]
    assert slope == pytest.approx(-np.sqrt(om), rel=1e-6)


def test_invert_Lplus_recovers_even_function():
    U0 = np.exp(-GRID.x ** 2 / 8)
    U = sp.invert_Lplus(OPS.Lplus(U0), OM, GRID)
    assert np.max(np.abs(U - U0)) < 1e-10


def test_invert_Lplus_gives_lambda():
    U = sp.invert_Lplus(-OM * sol.phi(GRID.x, OM), OM, GRID)
    assert np.max(np.abs(U - sol.lam(GRID.x, OM))) < 1e-10


def test_invert_Lplus_complex_and_precondition():
    W = OPS.Lplus(np.exp(-GRID.x ** 2))
    U = sp.invert_Lplus(W + 2j * W, OM, GRID)
    assert np.max(np.abs(U.imag - 2 * U.real)) < 1e-12
    with pytest.raises(sp.PreconditionError):
        sp.invert_Lplus(sol.dphi(GRID.x, OM), OM, GRID)


def test_invert_Mminus_recovers_input():
    f = np.exp(-(GRID.x - 1) ** 2) * np.sin(GRID.x)
    assert np.max(np.abs(sp.invert_Mminus(OPS.Mminus(f), OM, GRID) - f)) < 1e-10


def test_project_out():
    d = sol.dphi(GRID.x, OM)
    f = sp.project_out(GRID, np.exp(-(GRID.x - 1) ** 2), d)
    assert abs(np.dot(f, d)) < 1e-12 * np.linalg.norm(d) * np.linalg.norm(f)
