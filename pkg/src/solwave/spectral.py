"""Bound states of the truncated operators, the internal-mode scan and the
Green-function inverses of L+ and M-.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from . import soliton as sol
from .grid import Grid, cumulative_integral, default_grid, inner, integral_from, norm
from .operators import OperatorName

log = logging.getLogger(__name__)

SCHRODINGER_OPERATORS = (OperatorName.Lplus, OperatorName.Lminus,
                         OperatorName.Mplus, OperatorName.Mminus)


class EigensolverError(RuntimeError):
    pass


class PreconditionError(ValueError):
    pass


@dataclass
class SpectrumReport:
    operator: OperatorName
    omega: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray          # columns, unit Euclidean norm
    x: np.ndarray                     # interior nodes
    negative_count: int
    kernel_alignment: float           # nan when no kernel direction is known
    zero_tol: float

    def __post_init__(self):
        if np.any(np.diff(self.eigenvalues) < 0):
            raise ValueError("eigenvalues must be ascending")


# --- matrices --------------------------------------------------------------

def _potential(name: OperatorName, x, omega):
    p2 = sol.phi(x, omega) ** 2
    return {
        OperatorName.Lplus: omega - 3 * p2 + 5 * p2 * p2,
        OperatorName.Lminus: omega - p2 + p2 * p2,
        OperatorName.Mplus: omega - p2 * p2 / 3,
        OperatorName.Mminus: omega + p2 * p2,
    }[name]


def dirichlet_nodes(half_width: float, n: int) -> np.ndarray:
    h = 2 * half_width / (n + 1)
    return -half_width + h * np.arange(1, n + 1)


def laplacian_matrix(half_width: float, n: int, method: str = "sine") -> np.ndarray:
    """Matrix of -d^2/dx^2 on the n interior nodes with zero Dirichlet data.

    ``sine`` is the spectrally accurate sine-series discretization,
    ``fd2`` the three-point stencil.
    """
    h = 2 * half_width / (n + 1)
    if method == "fd2":
        return (np.diag(np.full(n, 2.0)) - np.diag(np.ones(n - 1), 1)
                - np.diag(np.ones(n - 1), -1)) / h ** 2
    if method == "sine":
        j = np.arange(1, n + 1)
        basis = math.sqrt(2.0 / (n + 1)) * np.sin(np.pi * np.outer(j, j) / (n + 1))
        k2 = (np.pi * j / (2 * half_width)) ** 2
        return (basis * k2) @ basis
    raise ValueError(f"unknown discretization {method!r}")


def periodic_laplacian_matrix(length: float, n: int) -> np.ndarray:
    """Fourier collocation matrix of -d^2/dx^2 on n periodic nodes."""
    xi = 2 * np.pi * np.fft.fftfreq(n, d=length / n)
    # circulant: first column is the inverse transform of the symbol
    col = np.fft.ifft(xi ** 2).real
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return col[idx]


def operator_matrix(name, omega, half_width, n, method="sine", boundary="dirichlet"):
    name = OperatorName(name)
    if name not in SCHRODINGER_OPERATORS:
        raise ValueError(f"matrix form only for {[o.value for o in SCHRODINGER_OPERATORS]}")
    if boundary == "dirichlet":
        x = dirichlet_nodes(half_width, n)
        lap = laplacian_matrix(half_width, n, method)
    elif boundary == "periodic":
        x = -half_width + 2 * half_width * np.arange(n) / n
        lap = periodic_laplacian_matrix(2 * half_width, n)
    else:
        raise ValueError(f"unknown boundary {boundary!r}")
    A = lap + np.diag(_potential(name, x, omega))
    return 0.5 * (A + A.T), x


def _eigh(A, k=None):
    try:
        if k is None or k >= A.shape[0]:
            return scipy.linalg.eigh(A)
        return scipy.linalg.eigh(A, subset_by_index=[0, k - 1])
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverError(f"eigensolver failed: {exc}") from exc


def _laplacian_top(half_width, n, method, boundary):
    if boundary == "periodic":
        return (np.pi * n / (2 * half_width)) ** 2
    h = 2 * half_width / (n + 1)
    return 4 / h ** 2 if method == "fd2" else (np.pi * n / (2 * half_width)) ** 2


def default_half_width(omega: float) -> float:
    return min(default_grid(omega).length / 2, 60 / math.sqrt(omega))


def spectrum(name, omega: float, k: int = 6, domain_half_width: float | None = None,
             n_points: int = 1024, method: str = "sine",
             boundary: str = "dirichlet") -> SpectrumReport:
    """Lowest ``k`` eigenpairs of L+, L-, M+ or M- truncated to [-W, W]."""
    name = OperatorName(name)
    omega = sol.check_omega(omega)
    W = default_half_width(omega) if domain_half_width is None else float(domain_half_width)
    if sol.phi(np.array([W]), omega)[0] > 1e-10:
        raise ValueError(f"half width {W} too small: phi tail above 1e-10 at the boundary")
    if n_points > 4096:
        raise ValueError("dense eigensolve limited to 4096 points")
    A, x = operator_matrix(name, omega, W, n_points, method, boundary)
    vals, vecs = _eigh(A, k)
    # upper bound of the operator norm: top of the Laplacian symbol plus sup |V|
    op_norm = _laplacian_top(W, n_points, method, boundary) + float(
        np.max(np.abs(_potential(name, x, omega))))
    zero_tol = 1e-8 * op_norm
    neg = int(np.sum(vals < -zero_tol))
    kernel = {OperatorName.Lminus: sol.phi(x, omega),
              OperatorName.Lplus: sol.dphi(x, omega)}.get(name)
    if kernel is None:
        align = float("nan")
    else:
        j = int(np.argmin(np.abs(vals)))
        align = min(1.0, float(abs(vecs[:, j] @ kernel) / np.linalg.norm(kernel)))
    return SpectrumReport(name, omega, vals, vecs, x, neg, align, zero_tol)


# --- internal-mode scan ----------------------------------------------------

@dataclass
class GapEigenvalue:
    value: float
    refined: float
    relative_move: float
    edge_approach: float      # fraction of the distance to omega^2 covered on refinement
    classification: str       # persistent | artifact | inconclusive


@dataclass
class InternalModeReport:
    omega: float
    gap_edge: float
    zero_multiplicity: int
    gap_eigenvalues: list = field(default_factory=list)
    refined_gap_count: int = 0
    lowest_continuum: float = float("nan")

    @property
    def persistent_count(self) -> int:
        return sum(e.classification == "persistent" for e in self.gap_eigenvalues)

    @property
    def inconclusive_count(self) -> int:
        return sum(e.classification == "inconclusive" for e in self.gap_eigenvalues)


def product_eigenvalues(omega: float, half_width: float, n: int, method: str = "sine",
                        lplus_extra=None):
    """Eigenvalues of L+ L- through the symmetric form L-^(1/2) L+ L-^(1/2).

    L- is nonnegative, so the symmetric form has the same nonzero spectrum
    as the product and a kernel containing the phi and x*phi directions.
    ``lplus_extra(x)`` adds a potential to L+ (used to plant a known mode).
    """
    Lp, x = operator_matrix(OperatorName.Lplus, omega, half_width, n, method)
    if lplus_extra is not None:
        Lp = Lp + np.diag(lplus_extra(x))
    Lm, _ = operator_matrix(OperatorName.Lminus, omega, half_width, n, method)
    mu, Q = _eigh(Lm)
    root = (Q * np.sqrt(np.clip(mu, 0.0, None))) @ Q.T
    K = root @ Lp @ root
    try:
        return scipy.linalg.eigvalsh(0.5 * (K + K.T))
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(str(exc)) from exc


def internal_mode_scan(omega: float, half_width: float | None = None, n_points: int = 512,
                       zero_tol: float = 1e-7, persistence_tol: float = 0.05,
                       method: str = "sine", lplus_extra=None) -> InternalModeReport:
    """Gap eigenvalues of L+ L- in (0, omega^2), classified by refinement.

    The refined run doubles the domain and halves the spacing.  An
    eigenvalue is persistent when it moves by less than ``persistence_tol``
    relative, an artifact when it moves toward the continuum edge, and
    inconclusive otherwise.  ``zero_tol`` is relative to omega^2.
    """
    omega = sol.check_omega(omega)
    if omega > sol.STABILITY_OMEGA_MAX:
        raise ValueError("internal_mode_scan takes omega in (0, 1/8]")
    W = default_half_width(omega) if half_width is None else float(half_width)
    edge = omega ** 2
    base = product_eigenvalues(omega, W, n_points, method, lplus_extra)
    refined = product_eigenvalues(omega, 2 * W, 4 * n_points + 3, method, lplus_extra)
    report = InternalModeReport(omega, edge, int(np.sum(np.abs(base) < zero_tol * edge)))
    in_gap = lambda v: v[(v > zero_tol * edge) & (v < edge)]
    refined_gap = in_gap(refined)
    report.refined_gap_count = int(refined_gap.size)
    above = base[base >= edge]
    report.lowest_continuum = float(above[0]) if above.size else float("nan")
    for value in in_gap(base):
        pool = refined[refined > zero_tol * edge]
        match = float(pool[np.argmin(np.abs(pool - value))]) if pool.size else float("nan")
        move = abs(match - value) / value
        approach = (match - value) / (edge - value)
        if move < persistence_tol:
            cls = "persistent"
        elif approach > 0:
            cls = "artifact"
        else:
            cls = "inconclusive"
        report.gap_eigenvalues.append(GapEigenvalue(float(value), match, move, approach, cls))
    if report.zero_multiplicity < 2:
        log.warning("zero eigenvalue multiplicity %d < 2", report.zero_multiplicity)
    return report


# --- homogeneous solutions and inverses ---------------------------------------

@dataclass
class HomogeneousSolutions:
    grid: Grid
    omega: float
    G: np.ndarray
    dG: np.ndarray
    H1: np.ndarray
    dH1: np.ndarray
    H2: np.ndarray
    dH2: np.ndarray
    trusted: np.ndarray           # boolean mask where the Wronskians are checked
    wronskian_residuals: dict


_ODE_OPTS = dict(method="DOP853", rtol=1e-13, atol=1e-20)


def _lplus_rhs(omega):
    def rhs(x, y):
        p2 = sol.phi(np.array([x]), omega)[0] ** 2
        return [y[1], (omega - 3 * p2 + 5 * p2 * p2) * y[0]]
    return rhs


def _mminus_rhs(omega):
    def rhs(x, y):
        p4 = sol.phi(np.array([x]), omega)[0] ** 4
        return [y[1], (omega + p4) * y[0]]
    return rhs


def build_homogeneous(omega: float, grid: Grid | None = None,
                      trusted_decay: float = 30.0) -> HomogeneousSolutions:
    """G (even, L+ G = 0) and H1, H2 (M- H = 0, decaying right / left).

    G is seeded at the origin from its even Cauchy data and integrated
    outward, which is its growing direction.  H1 is seeded on the right end
    from the two-term tail expansion and integrated leftward (again the
    growing direction); H2 is its mirror image.  Wronskians are normalized
    to 1 and their residuals measured where sqrt(w)|x| <= ``trusted_decay``.
    """
    omega = sol.check_omega(omega)
    grid = grid or default_grid(omega)
    x = grid.x
    n = grid.n_points
    if n % 2:
        raise ValueError("build_homogeneous needs an even number of grid points")
    sw = math.sqrt(omega)
    mid = n // 2                    # x[mid] == 0
    right = x[mid:]

    d2phi0 = sol.d2phi(np.array([0.0]), omega)[0]
    solG = solve_ivp(_lplus_rhs(omega), (0.0, right[-1]), [1.0 / d2phi0, 0.0],
                     t_eval=right, **_ODE_OPTS)
    if not solG.success:
        raise RuntimeError(f"G integration failed: {solG.message}")
    G_right, dG_right = solG.y
    G = np.empty(n)
    dG = np.empty(n)
    G[mid:], dG[mid:] = G_right, dG_right
    G[1:mid] = G_right[1:mid][::-1]
    dG[1:mid] = -dG_right[1:mid][::-1]
    # node 0 sits at -L/2 with no mirror node; extrapolate by the ODE
    tail = solve_ivp(_lplus_rhs(omega), (0.0, x[0]), [1.0 / d2phi0, 0.0],
                     t_eval=[x[0]], **_ODE_OPTS)
    G[0], dG[0] = tail.y[:, -1]

    # H1 ~ exp(-s x)(1 + c exp(-4 s x)); phi^4 ~ A exp(-4 s x) on the right tail
    a = sol.a_omega(omega)
    amp4 = (4 * omega) ** 2 * (2 / a) ** 2
    c = amp4 / (24 * omega)
    x_seed = x[-1]
    # seed scaled to O(1); the Wronskian normalization fixes the amplitude
    e4 = math.exp(-4 * sw * x_seed)
    seed = [1 + c * e4, -sw * (1 + 5 * c * e4)]
    solH = solve_ivp(_mminus_rhs(omega), (x_seed, x[0]), seed, t_eval=x[::-1], **_ODE_OPTS)
    if not solH.success:
        raise RuntimeError(f"H1 integration failed: {solH.message}")
    H1 = solH.y[0][::-1].copy()
    dH1 = solH.y[1][::-1].copy()
    wr0 = -2 * H1[mid] * dH1[mid]
    H1 /= math.sqrt(wr0)
    dH1 /= math.sqrt(wr0)
    # H2(x) = H1(-x); node 0 again needs its own value
    H2 = grid.reflect(H1)
    dH2 = -grid.reflect(dH1)
    # one short step past the seed in the decaying direction gives H1(L/2)
    extra = solve_ivp(_mminus_rhs(omega), (x_seed, -x[0]), seed, t_eval=[-x[0]], **_ODE_OPTS)
    H2[0] = extra.y[0, -1] / math.sqrt(wr0)
    dH2[0] = -extra.y[1, -1] / math.sqrt(wr0)

    trusted = sw * np.abs(x) <= trusted_decay
    p1 = sol.dphi(x, omega)
    p2 = sol.d2phi(x, omega)
    wG = p2 * G - p1 * dG
    wH = H1 * dH2 - dH1 * H2
    res = {
        "G_max": float(np.max(np.abs(wG[trusted] - 1))),
        "G_std": float(np.std(wG[trusted])),
        "H_max": float(np.max(np.abs(wH[trusted] - 1))),
        "H_std": float(np.std(wH[trusted])),
    }
    if max(res["G_max"], res["H_max"]) > 1e-6:
        raise RuntimeError(f"Wronskian drift above 1e-6: {res}")
    return HomogeneousSolutions(grid, omega, G, dG, H1, dH1, H2, dH2, trusted, res)


_HOMOGENEOUS_CACHE: dict = {}


def homogeneous_for(omega: float, grid: Grid | None = None) -> HomogeneousSolutions:
    grid = grid or default_grid(omega)
    key = (float(omega), grid)
    if key not in _HOMOGENEOUS_CACHE:
        _HOMOGENEOUS_CACHE[key] = build_homogeneous(omega, grid)
    return _HOMOGENEOUS_CACHE[key]


def invert_Lplus(W: np.ndarray, omega: float, grid: Grid | None = None,
                 tol: float = 1e-8) -> np.ndarray:
    """Two-branch Green-function solution of L+ U = W for W orthogonal to phi'."""
    omega = sol.check_omega(omega)
    grid = grid or default_grid(omega)
    W = grid.check(W, "W")
    if np.iscomplexobj(W):
        return invert_Lplus(W.real, omega, grid, tol) + 1j * invert_Lplus(W.imag, omega, grid, tol)
    hs = homogeneous_for(omega, grid)
    p1 = sol.dphi(grid.x, omega)
    overlap = inner(grid, W, p1)
    scale = norm(grid, W) * norm(grid, p1)
    if abs(overlap) > tol * max(scale, 1e-300):
        raise PreconditionError(
            f"<W, phi'> = {overlap:.3e} is not zero (relative {overlap / scale:.3e})")
    h = grid.spacing
    mid = grid.n_points // 2
    G = hs.G
    from_origin = integral_from(G * W, h, mid)           # int_0^x G W
    PW = p1 * W
    U = np.empty(grid.n_points)
    U[mid:] = -p1[mid:] * from_origin[mid:] - G[mid:] * cumulative_integral(PW, h, True)[mid:]
    U[:mid] = -p1[:mid] * from_origin[:mid] + G[:mid] * cumulative_integral(PW, h)[:mid]
    return U


def invert_Mminus(W: np.ndarray, omega: float, grid: Grid | None = None) -> np.ndarray:
    """J-[W] = H1 * int_{-inf}^x H2 W + H2 * int_x^inf H1 W."""
    omega = sol.check_omega(omega)
    grid = grid or default_grid(omega)
    W = grid.check(W, "W")
    hs = homogeneous_for(omega, grid)
    h = grid.spacing
    return (hs.H1 * cumulative_integral(hs.H2 * W, h)
            + hs.H2 * cumulative_integral(hs.H1 * W, h, from_right=True))


def project_out(grid: Grid, f: np.ndarray, direction: np.ndarray) -> np.ndarray:
    return f - inner(grid, f, direction) / inner(grid, direction, direction) * direction
