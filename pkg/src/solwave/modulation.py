"""Modulation decomposition psi -> (beta, sigma, gamma, omega, u) and the
diagnostics of the modulation rates and the u-equation.

    u(x) = exp(-i gamma) exp(-i beta x) psi(x + sigma) - phi_omega(x)

with u orthogonal to phi, x phi, i Lambda and i phi'.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np
from scipy.optimize import brentq

from . import soliton as sol
from .evolution import momentum, mass, nonlinearity
from .grid import Grid, inner, norm, shift, spectral_derivative
from .operators import SolitonOperators
from .soliton import FullParams

log = logging.getLogger(__name__)

ORTHO_LABELS = ("phi", "x*phi", "i*Lambda", "i*phi'")


class ModulationError(RuntimeError):
    def __init__(self, message, residuals=None, params=None):
        super().__init__(message)
        self.residuals = residuals
        self.params = params


@dataclass
class ModulationFrame:
    t: float
    params: FullParams
    u: np.ndarray
    ortho_residuals: np.ndarray
    iterations: int = 0


def _directions(x, omega):
    p = sol.phi(x, omega)
    return (p, x * p, 1j * sol.lam(x, omega), 1j * sol.dphi(x, omega))


def _moving_frame(grid: Grid, psi, beta, sigma, gamma):
    """exp(-i gamma - i beta x) psi(x + sigma)."""
    return np.exp(-1j * (gamma + beta * grid.x)) * shift(grid, psi, -sigma)


def ortho_residuals(grid: Grid, u, omega) -> np.ndarray:
    """|<u, e_j>| / (|e_j| |phi_omega|) for the four orthogonality directions."""
    dirs = _directions(grid.x, omega)
    scale = norm(grid, dirs[0])
    return np.array([inner(grid, u, e) / (norm(grid, e) * scale) for e in dirs])


def residual_field(grid: Grid, psi, params: FullParams) -> np.ndarray:
    w = _moving_frame(grid, psi, params.beta, params.sigma, params.gamma)
    return w - sol.phi(grid.x, params.omega)


def reconstruct(grid: Grid, params: FullParams, u) -> np.ndarray:
    """psi(y) = exp(i(beta (y - sigma) + gamma)) [phi_omega + u](y - sigma)."""
    inner_field = sol.phi(grid.x, params.omega) + u
    moved = shift(grid, inner_field, params.sigma)
    return np.exp(1j * (params.beta * (grid.x - params.sigma) + params.gamma)) * moved


def _omega_from_peak(peak: float) -> float:
    # phi(0)^2 = 4 w / (1 + a_w), increasing in w on (0, 3/16)
    target = peak ** 2
    cap = sol.phi(np.array([0.0]), sol.OMEGA_MAX * (1 - 1e-12))[0] ** 2
    if target >= cap:
        return sol.OMEGA_MAX * (1 - 1e-6)
    f = lambda w: 4 * w / (1 + sol.a_omega(w)) - target
    return brentq(f, 1e-12, sol.OMEGA_MAX * (1 - 1e-12), xtol=1e-15)


def initial_guess(grid: Grid, psi) -> FullParams:
    """Heuristic: beta from momentum/mass, sigma and omega from the peak,
    gamma from the phase at the peak."""
    psi = np.asarray(psi, dtype=complex)
    beta = -momentum(grid, psi) / mass(grid, psi)
    j = int(np.argmax(np.abs(psi)))
    sigma = float(grid.x[j])
    omega = _omega_from_peak(float(np.abs(psi[j])))
    gamma = float(np.angle(psi[j] * np.exp(-1j * beta * sigma)))
    return FullParams(omega=omega, beta=beta, sigma=sigma, gamma=gamma)


def linearization_matrix(grid: Grid, omega: float) -> np.ndarray:
    """Jacobian of the normalized orthogonality map at u = 0, beta = 0."""
    x = grid.x
    p = sol.phi(x, omega)
    cols = (-1j * x * p, sol.dphi(x, omega) + 0j, -1j * p, -sol.lam(x, omega) / omega + 0j)
    dirs = _directions(x, omega)
    scale = norm(grid, dirs[0])
    return np.array([[inner(grid, c, e) / (norm(grid, e) * scale) for c in cols] for e in dirs])


def decompose(grid: Grid, psi, guess: FullParams | None = None, t: float = 0.0,
              tol: float = 1e-12, max_iter: int = 50) -> ModulationFrame:
    """Damped Newton solve of the four orthogonality conditions.

    Jacobian columns for beta, sigma and gamma are exact pairings of the
    parameter derivatives of u; the omega column is a central difference
    (only phi_omega and the directions depend on omega).
    """
    psi = grid.check(np.asarray(psi, dtype=complex), "psi")
    p = (guess or initial_guess(grid, psi)).as_array().astype(float)
    x = grid.x

    def evaluate(p):
        beta, sigma, gamma, omega = p
        sol.check_omega(omega)
        w = _moving_frame(grid, psi, beta, sigma, gamma)
        return w, ortho_residuals(grid, w - sol.phi(x, omega), omega)

    try:
        w, F = evaluate(p)
    except ValueError as exc:
        raise ModulationError(f"bad starting point: {exc}", params=p) from exc
    it = 0
    polish = 1       # one extra step after reaching tol pushes F to roundoff
    while np.max(np.abs(F)) >= tol or polish:
        if np.max(np.abs(F)) < tol:
            polish -= 1
        if it >= max_iter:
            raise ModulationError(f"no convergence in {max_iter} iterations", F, p)
        it += 1
        beta, sigma, gamma, omega = p
        dirs = _directions(x, omega)
        scale = norm(grid, dirs[0])
        cols = (-1j * x * w, spectral_derivative(grid, w, 1) + 1j * beta * w, -1j * w)
        J = np.empty((4, 4))
        for k, c in enumerate(cols):
            J[:, k] = [inner(grid, c, e) / (norm(grid, e) * scale) for e in dirs]
        h = 1e-6 * omega
        Fp = ortho_residuals(grid, w - sol.phi(x, omega + h), omega + h)
        Fm = ortho_residuals(grid, w - sol.phi(x, omega - h), omega - h)
        J[:, 3] = (Fp - Fm) / (2 * h)
        try:
            step = -np.linalg.solve(J, F)
        except np.linalg.LinAlgError as exc:
            raise ModulationError("singular linearization", F, p) from exc
        lam = 1.0
        while True:
            trial = p + lam * step
            try:
                w_t, F_t = evaluate(trial)
                if np.linalg.norm(F_t) < np.linalg.norm(F) or lam < 1e-3:
                    break
                if np.max(np.abs(F)) < tol:
                    # already converged; keep the better point
                    trial, w_t, F_t = p, w, F
                    break
            except ValueError:
                if lam < 1e-3:
                    raise ModulationError("omega left (0, 3/16)", F, trial)
            lam *= 0.5
        p, w, F = trial, w_t, F_t
    params = FullParams.from_array(p)
    u = w - sol.phi(x, params.omega)
    return ModulationFrame(t, params, u, np.abs(F), it)


def decompose_trajectory(grid: Grid, frames: Iterable[tuple[float, np.ndarray]],
                         guess: FullParams | None = None) -> Iterator[ModulationFrame]:
    """Warm-started decomposition of successive frames with gamma unwrapped."""
    prev = guess
    for t, psi in frames:
        frame = decompose(grid, psi, prev, t=t)
        if prev is not None:
            g = frame.params.gamma
            k = round((prev.gamma - g) / (2 * math.pi))
            if k:
                frame.params = FullParams(frame.params.omega, frame.params.beta,
                                          frame.params.sigma, g + 2 * math.pi * k)
        prev = frame.params
        yield frame


# --- rates -------------------------------------------------------------------

@dataclass
class RateReport:
    t: np.ndarray
    beta_dot: np.ndarray
    sigma_dot: np.ndarray
    gamma_dot: np.ndarray
    omega_dot: np.ndarray
    weighted_u2: np.ndarray                 # sqrt(w) |sech(sqrt(w) x/2) u|^2
    ratios: dict = field(default_factory=dict)

    def constant(self, t_min: float = -math.inf, t_max: float = math.inf) -> float:
        """Largest of the four ratios over frames with t in [t_min, t_max]."""
        m = (self.t >= t_min) & (self.t <= t_max)
        vals = [np.max(r[m][np.isfinite(r[m])]) for r in self.ratios.values()
                if np.any(np.isfinite(r[m]))]
        return float(max(vals)) if vals else float("nan")


def _uniform_rates(t, P):
    t = np.asarray(t, dtype=float)
    if t.size < 5:
        raise ValueError("rate diagnostics need at least 5 frames")
    dts = np.diff(t)
    if np.max(np.abs(dts - dts[0])) > 1e-9 * max(1.0, abs(dts[0])):
        raise ValueError("frames must be uniformly spaced")
    return np.gradient(np.asarray(P, dtype=float), dts[0], axis=0, edge_order=2)


def _rates(frames):
    t = np.array([f.t for f in frames])
    P = np.array([f.params.as_array() for f in frames])
    return t, P, _uniform_rates(t, P)


def weighted_u_norm(grid: Grid, u, omega: float) -> float:
    """sqrt(w) |sech(sqrt(w) x / 2) u|^2, the size the rates are compared with."""
    sw = math.sqrt(omega)
    return sw * norm(grid, u / np.cosh(sw * grid.x / 2)) ** 2


def rate_report(t, params, weighted_u2) -> RateReport:
    """Rates and ratios from a parameter series (rows beta, sigma, gamma,
    omega) and the per-frame weighted size of u."""
    t = np.asarray(t, dtype=float)
    P = np.asarray(params, dtype=float)
    D = _uniform_rates(t, P)
    beta, sigma, gamma, omega = P.T
    bd, sd, gd, od = D.T
    sw = np.sqrt(omega)
    weighted = np.asarray(weighted_u2, dtype=float)
    denom = np.where(weighted > 0, weighted, np.nan)
    ratios = {
        "beta_dot/sqrt(w)": np.abs(bd) / sw / denom,
        "omega_dot/w": np.abs(od) / omega / denom,
        "sqrt(w)|sigma_dot-2beta|": sw * np.abs(sd - 2 * beta) / denom,
        "|gamma_dot-w-beta^2|": np.abs(gd - omega - beta ** 2) / denom,
    }
    return RateReport(t, bd, sd, gd, od, weighted, ratios)


def rate_diagnostics(grid: Grid, frames: list[ModulationFrame]) -> RateReport:
    t = [f.t for f in frames]
    P = [f.params.as_array() for f in frames]
    weighted = [weighted_u_norm(grid, f.u, f.params.omega) for f in frames]
    return rate_report(t, P, weighted)


# --- u-equation ------------------------------------------------------------

@dataclass
class UEquationTerms:
    theta1: np.ndarray
    theta2: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    q1: np.ndarray
    q2: np.ndarray


def u_equation_terms(grid: Grid, frame: ModulationFrame, rates: np.ndarray,
                     phase_coefficient: str = "exact") -> UEquationTerms:
    """theta, m, q of the u-equation for one frame.

    ``rates`` is (beta_dot, sigma_dot, gamma_dot, omega_dot).  The phase
    coefficient multiplying phi and u is gamma_dot - beta sigma_dot + beta^2
    - omega for ``exact`` and gamma_dot - omega - beta^2 for ``printed``;
    they differ by -beta (sigma_dot - 2 beta).
    """
    bd, sd, gd, od = rates
    beta, omega = frame.params.beta, frame.params.omega
    x = grid.x
    p = sol.phi(x, omega)
    if phase_coefficient == "exact":
        c = gd - beta * sd + beta ** 2 - omega
    elif phase_coefficient == "printed":
        c = gd - omega - beta ** 2
    else:
        raise ValueError("phase_coefficient must be 'exact' or 'printed'")
    drift = sd - 2 * beta
    u = frame.u
    u1, u2 = u.real, u.imag
    theta1 = bd * x * p + c * p
    theta2 = -(od / omega) * sol.lam(x, omega) + drift * sol.dphi(x, omega)
    m1 = bd * x * u1 + c * u1 - drift * spectral_derivative(grid, u2, 1)
    m2 = bd * x * u2 + c * u2 + drift * spectral_derivative(grid, u1, 1)
    fp = 3 * p ** 2 - 5 * p ** 4
    f_over = p ** 2 - p ** 4
    full = nonlinearity(p + u)
    q1 = (full - nonlinearity(p + 0j)).real - fp * u1
    q2 = full.imag - f_over * u2
    return UEquationTerms(theta1, theta2, m1, m2, q1, q2)


@dataclass
class UEquationReport:
    t: np.ndarray
    weighted_sup: np.ndarray
    weighted_l2: np.ndarray
    dudt_scale: np.ndarray

    @property
    def max_sup(self) -> float:
        return float(np.max(self.weighted_sup))

    @property
    def max_l2(self) -> float:
        return float(np.max(self.weighted_l2))


def u_equation_residual(grid: Grid, frames: list[ModulationFrame],
                        phase_coefficient: str = "exact") -> UEquationReport:
    """Compare the right-hand side of the u-equation with a centred
    difference of u on interior frames; weight rho = sech(sqrt(w) x / 10)."""
    if len(frames) < 5:
        raise ValueError("need at least 5 frames")
    t, P, D = _rates(frames)
    dt = t[1] - t[0]
    sup_res, l2_res, scale = [], [], []
    for k in range(1, len(frames) - 1):
        f = frames[k]
        omega = f.params.omega
        ops = SolitonOperators(omega, grid, dealias=False)
        terms = u_equation_terms(grid, f, D[k][[0, 1, 2, 3]], phase_coefficient)
        # u lives at different omega on neighbouring frames; the difference
        # quotient is still the time derivative of the residual field
        dudt = (frames[k + 1].u - frames[k - 1].u) / (2 * dt)
        u1, u2 = f.u.real, f.u.imag
        rhs1 = ops.Lminus(u2) + terms.theta2 + terms.m2 - terms.q2
        rhs2 = -ops.Lplus(u1) - terms.theta1 - terms.m1 + terms.q1
        rho = 1.0 / np.cosh(math.sqrt(omega) * grid.x / 10)
        r = rho * ((dudt.real - rhs1) + 1j * (dudt.imag - rhs2))
        sup_res.append(float(np.max(np.abs(r))))
        l2_res.append(norm(grid, r))
        scale.append(float(np.max(np.abs(rho * dudt))))
    return UEquationReport(t[1:-1], np.array(sup_res), np.array(l2_res), np.array(scale))
