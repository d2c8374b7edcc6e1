"""The explicit solitary-wave family and its frequency derivative.

All pointwise evaluators use ``t = exp(-2*sqrt(omega)*|x|)`` so that
cosh/sinh never overflow, whatever the domain size.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial

from .grid import Grid, default_grid, inner, spectral_derivative

log = logging.getLogger(__name__)

OMEGA_MAX = 3.0 / 16.0
STABILITY_OMEGA_MAX = 1.0 / 8.0


def check_omega(omega: float, closed: bool = False) -> float:
    omega = float(omega)
    upper_ok = omega <= OMEGA_MAX if closed else omega < OMEGA_MAX
    if not (np.isfinite(omega) and omega > 0 and upper_ok):
        interval = "(0, 3/16]" if closed else "(0, 3/16)"
        raise ValueError(f"omega must lie in {interval}, got {omega}")
    return omega


@dataclass(frozen=True)
class SolitonParams:
    omega: float

    def __post_init__(self):
        check_omega(self.omega)


@dataclass(frozen=True)
class FullParams:
    """Frequency, boost, centre and phase of a travelling solitary wave."""

    omega: float
    beta: float = 0.0
    sigma: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        check_omega(self.omega)
        for name in ("beta", "sigma", "gamma"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.beta, self.sigma, self.gamma, self.omega])

    @classmethod
    def from_array(cls, p) -> "FullParams":
        beta, sigma, gamma, omega = (float(v) for v in p)
        return cls(omega=omega, beta=beta, sigma=sigma, gamma=gamma)


def a_omega(omega: float) -> float:
    omega = check_omega(omega, closed=True)
    return math.sqrt(max(0.0, 1.0 - 16.0 * omega / 3.0))


def _pieces(x, omega):
    x = np.asarray(x, dtype=float)
    a = a_omega(omega)
    k = 2.0 * math.sqrt(omega)
    t = np.exp(-k * np.abs(x))
    e = 2.0 * t + a * (1.0 + t * t)  # 2t * (1 + a cosh(kx))
    return x, a, k, t, e


def phi(x, omega: float) -> np.ndarray:
    """``sqrt(4w / (1 + a_w cosh(2 sqrt(w) x)))``."""
    x, a, k, t, e = _pieces(x, omega)
    return 2.0 * math.sqrt(omega) * np.sqrt(2.0 * t / e)


def log_derivative(x, omega: float) -> np.ndarray:
    """R = phi'/phi = -a sqrt(w) sinh(kx) / (1 + a cosh(kx))."""
    x, a, k, t, e = _pieces(x, omega)
    return -a * math.sqrt(omega) * np.sign(x) * (1.0 - t * t) / e


def log_derivative_prime(x, omega: float) -> np.ndarray:
    # R' = -phi^2/2 + 2 phi^4/3
    p2 = phi(x, omega) ** 2
    return -0.5 * p2 + (2.0 / 3.0) * p2 * p2


def dphi(x, omega: float) -> np.ndarray:
    return log_derivative(x, omega) * phi(x, omega)


def d2phi(x, omega: float) -> np.ndarray:
    p = phi(x, omega)
    return omega * p - p ** 3 + p ** 5


# Derivatives of P(phi) are tracked as  A(phi) + B(phi) * phi'  with
# phi'' = w phi - phi^3 + phi^5 and (phi')^2 = w phi^2 - phi^4/2 + phi^6/3.

@lru_cache(maxsize=256)
def _derivative_polys(power: int, order: int, omega: float):
    f1 = Polynomial([0, omega, 0, -1, 0, 1])
    f2 = Polynomial([0, 0, omega, 0, -0.5, 0, 1.0 / 3.0])
    a = Polynomial([0] * power + [1])
    b = Polynomial([0])
    for _ in range(order):
        a, b = b.deriv() * f2 + b * f1, a.deriv()
    return a, b


def power_derivative(x, omega: float, power: int, order: int) -> np.ndarray:
    """``d^order/dx^order`` of ``phi^power`` in closed form."""
    a, b = _derivative_polys(int(power), int(order), float(omega))
    p = phi(x, omega)
    return a(p) + b(p) * log_derivative(x, omega) * p


def phi_derivative(x, omega: float, order: int) -> np.ndarray:
    return power_derivative(x, omega, 1, order)


def _lambda_ratio(x, omega):
    """Returns (l, l') with l = Lambda/phi = w d(ln phi)/dw."""
    x, a, k, t, e = _pieces(x, omega)
    sw = math.sqrt(omega)
    da = -8.0 / (3.0 * a)
    sgn = np.sign(x)
    cosh_d = (1.0 + t * t) / e                 # cosh(kx)/D
    xsinh_d = np.abs(x) * (1.0 - t * t) / e    # x sinh(kx)/D
    ell = 0.5 - 0.5 * omega * (da * cosh_d + a * xsinh_d / sw)
    sinh_d = sgn * (1.0 - t * t) / e           # sinh/D
    sinh_d2 = sgn * 2.0 * t * (1.0 - t * t) / e ** 2
    cosha_d2 = 2.0 * t * (1.0 + t * t + 2.0 * a * t) / e ** 2
    dell = -0.5 * omega * (da * k * sinh_d2 + (a / sw) * (sinh_d + x * k * cosha_d2))
    return ell, dell


def lam(x, omega: float) -> np.ndarray:
    """Lambda = w d(phi)/dw, differentiated analytically."""
    ell, _ = _lambda_ratio(x, omega)
    return phi(x, omega) * ell


def dlam(x, omega: float) -> np.ndarray:
    ell, dell = _lambda_ratio(x, omega)
    return phi(x, omega) * (log_derivative(x, omega) * ell + dell)


def d2lam(x, omega: float) -> np.ndarray:
    # from L+ Lambda = -w phi
    p = phi(x, omega)
    return omega * p + (omega - 3 * p ** 2 + 5 * p ** 4) * lam(x, omega)


def lambda_log_ratio_prime(x, omega: float) -> np.ndarray:
    """(Lambda/phi)' = (Lambda' phi - phi' Lambda)/phi^2, bounded and smooth."""
    return _lambda_ratio(x, omega)[1]


def _warn_if_narrow(omega, grid):
    if math.sqrt(omega) * grid.length / 2 < 40:
        log.warning("grid half-width %.1f too small for omega=%g (sqrt(w) L/2 < 40)",
                    grid.length / 2, omega)
        return True
    return False


def phi_profile(omega: float, grid: Grid) -> np.ndarray:
    check_omega(omega)
    _warn_if_narrow(omega, grid)
    return phi(grid.x, omega)


def lambda_profile(omega: float, grid: Grid) -> np.ndarray:
    check_omega(omega)
    _warn_if_narrow(omega, grid)
    return lam(grid.x, omega)


def profile_residual(omega: float, grid: Grid, scale: float = 1.0) -> float:
    """Sup norm of phi'' + phi^3 - phi^5 - w phi with spectral phi''.

    ``scale`` multiplies the sampled profile (fault injection for checks).
    """
    p = scale * phi_profile(omega, grid)
    res = spectral_derivative(grid, p, 2) + p ** 3 - p ** 5 - omega * p
    return float(np.max(np.abs(res)))


def mass(omega: float, grid: Grid | None = None) -> float:
    grid = grid or default_grid(omega)
    p = phi_profile(omega, grid)
    return inner(grid, p, p)


def lemma1_constants(omega_list, n_points: int = 4096) -> dict:
    """Measured constants of the tail bounds and of <phi, Lambda> >= c sqrt(w).

    Each omega gets its own scaled grid so the soliton is equally resolved.
    """
    rows = []
    for omega in omega_list:
        omega = check_omega(omega)
        if omega > STABILITY_OMEGA_MAX:
            raise ValueError("lemma1_constants takes omega in (0, 1/8]")
        grid = default_grid(omega, n_points)
        x = grid.x
        sw = math.sqrt(omega)
        envelope = np.exp(sw * np.abs(x))
        row = {"omega": omega}
        lam_derivs = [lam(x, omega), dlam(x, omega), d2lam(x, omega)]
        for k in range(3):
            scale = omega ** (-(1 + k) / 2) * envelope
            row[f"C_phi_{k}"] = float(np.max(np.abs(phi_derivative(x, omega, k)) * scale))
            row[f"C_lambda_{k}"] = float(
                np.max(np.abs(lam_derivs[k]) * scale / (1.0 + sw * np.abs(x))))
        p = phi(x, omega)
        row["phi_lambda_over_sqrt_omega"] = inner(grid, p, lam_derivs[0]) / sw
        rows.append(row)
    return {
        "rows": rows,
        "C_phi": [max(r[f"C_phi_{k}"] for r in rows) for k in range(3)],
        "C_lambda": [max(r[f"C_lambda_{k}"] for r in rows) for k in range(3)],
        "c_lower": min(r["phi_lambda_over_sqrt_omega"] for r in rows),
    }
