"""Experiment configuration, the long-time perturbation run, persistence and
the consolidated verification battery."""

from __future__ import annotations

import configparser
import csv
import dataclasses
import json
import logging
import math
import os
import subprocess
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterator

import numpy as np
from scipy.integrate import trapezoid

from . import __version__
from . import operators, spectral, virial
from . import soliton as sol
from .evolution import EvolutionConfig, conserved, iter_evolve, mass, wraparound_time
from .grid import Grid, default_grid, norm, spectral_derivative
from .modulation import (ModulationError, ModulationFrame, decompose_trajectory,
                         rate_report, weighted_u_norm)
from .operators import SolitonOperators
from .probes import corpus
from .virial import WeightSpec, build_weights, coercivity_monitor, functionals, transform_v

log = logging.getLogger(__name__)

PERTURBATION_SHAPES = ("gaussian", "modulated-gaussian", "random-smooth")


# --- configuration -------------------------------------------------------------

@dataclass(frozen=True)
class PerturbationConfig:
    """Shape of the initial perturbation; it is normalized to unit H^1 norm."""

    shape: str = "gaussian"
    width: float = 2.0
    center: float = 0.0
    wavenumber: float = 1.0
    seed: int = 0
    project_mass: bool = False

    def __post_init__(self):
        if self.shape not in PERTURBATION_SHAPES:
            raise ValueError(f"shape must be one of {PERTURBATION_SHAPES}, got {self.shape!r}")
        if not self.width > 0:
            raise ValueError("width must be positive")


@dataclass(frozen=True)
class GridConfig:
    n_points: int = 16384
    length: float = 1920.0

    def build(self) -> Grid:
        return Grid(int(self.n_points), float(self.length))


@dataclass(frozen=True)
class ExperimentConfig:
    omega0: float = 0.125
    epsilon: float = 0.01
    perturbation: PerturbationConfig = field(default_factory=PerturbationConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    evolution: EvolutionConfig = field(
        default_factory=lambda: EvolutionConfig(dt=2e-3, t_end=100.0, record_stride=50))
    weights: WeightSpec = field(default_factory=WeightSpec)
    out_dir: str | None = None

    def __post_init__(self):
        if not (0 < self.omega0 <= sol.STABILITY_OMEGA_MAX):
            raise ValueError(f"omega0 must lie in (0, 1/8], got {self.omega0}")
        if not (0 <= self.epsilon <= 0.05):
            raise ValueError(f"epsilon must lie in [0, 0.05], got {self.epsilon}")
        if self.weights.omega0 != self.omega0:
            object.__setattr__(self, "weights", dataclasses.replace(self.weights, omega0=self.omega0))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_SECTIONS = {
    "perturbation": PerturbationConfig,
    "grid": GridConfig,
    "evolution": EvolutionConfig,
    "weights": WeightSpec,
}


def _coerce(cls, key, raw):
    types = {f.name: f.type for f in fields(cls)}
    if key not in types:
        raise KeyError(f"unknown key {key!r} for {cls.__name__}; valid: {sorted(types)}")
    kind = str(types[key])
    if "bool" in kind:
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if "int" in kind and "float" not in kind:
        return int(raw)
    if "float" in kind:
        return float(raw)
    return raw.strip()


def parse_config(text: str, seed: int | None = None) -> ExperimentConfig:
    """Build an ExperimentConfig from INI-style ``key = value`` text.

    Top-level keys live in ``[experiment]``; the nested parts use the
    sections ``[perturbation]``, ``[grid]``, ``[evolution]`` and ``[weights]``.
    """
    cp = configparser.ConfigParser()
    cp.optionxform = str          # keep A and B distinct from a and b
    cp.read_string(text)
    unknown = set(cp.sections()) - set(_SECTIONS) - {"experiment"}
    if unknown:
        raise KeyError(f"unknown config sections {sorted(unknown)}")
    base = ExperimentConfig()
    parts = {}
    for name, cls in _SECTIONS.items():
        current = dataclasses.asdict(getattr(base, name))
        if cp.has_section(name):
            for k, v in cp.items(name):
                current[k] = _coerce(cls, k, v)
        parts[name] = current
    top = {}
    if cp.has_section("experiment"):
        for k, v in cp.items("experiment"):
            top[k] = _coerce(ExperimentConfig, k, v) if k != "out_dir" else v.strip()
    if seed is not None:
        parts["perturbation"]["seed"] = int(seed)
    omega0 = top.get("omega0", base.omega0)
    parts["weights"]["omega0"] = omega0
    return ExperimentConfig(
        omega0=omega0,
        epsilon=top.get("epsilon", base.epsilon),
        perturbation=PerturbationConfig(**parts["perturbation"]),
        grid=GridConfig(**parts["grid"]),
        evolution=EvolutionConfig(**parts["evolution"]),
        weights=WeightSpec(**parts["weights"]),
        out_dir=top.get("out_dir"),
    )


def load_config(path: str | os.PathLike, seed: int | None = None) -> ExperimentConfig:
    return parse_config(Path(path).read_text(), seed)


def config_keys() -> list[str]:
    """Dotted names of every configuration key."""
    keys = []
    for f in fields(ExperimentConfig):
        if f.name in _SECTIONS:
            keys += [f"{f.name}.{g.name}" for g in fields(_SECTIONS[f.name])]
        else:
            keys.append(f.name)
    return keys


# --- initial data -----------------------------------------------------------------

def perturbation_field(cfg: PerturbationConfig, grid: Grid) -> np.ndarray:
    """Perturbation of unit H^1 norm."""
    x = grid.x
    env = np.exp(-((x - cfg.center) / cfg.width) ** 2)
    if cfg.shape == "gaussian":
        p = env + 0j
    elif cfg.shape == "modulated-gaussian":
        p = env * np.exp(1j * cfg.wavenumber * x)
    else:
        rng = np.random.default_rng(cfg.seed)
        noise = rng.standard_normal(grid.n_points) + 1j * rng.standard_normal(grid.n_points)
        # band-limit to |xi| <~ 2/width and localize on 5 widths
        spec = np.fft.fft(noise) * np.exp(-(grid.xi * cfg.width / 2) ** 2)
        p = np.fft.ifft(spec) * np.exp(-((x - cfg.center) / (5 * cfg.width)) ** 2)
    h1 = math.sqrt(norm(grid, p) ** 2 + norm(grid, spectral_derivative(grid, p, 1)) ** 2)
    return p / h1


def initial_field(cfg: ExperimentConfig, grid: Grid) -> np.ndarray:
    p0 = sol.phi(grid.x, cfg.omega0) + 0j
    psi = p0 + cfg.epsilon * perturbation_field(cfg.perturbation, grid)
    if cfg.perturbation.project_mass and cfg.epsilon > 0:
        psi = psi * math.sqrt(mass(grid, p0) / mass(grid, psi))
    return psi


# --- records -----------------------------------------------------------------------

@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    beta: float
    sigma: float
    gamma: float
    omega: float
    mass: float
    momentum: float
    energy: float
    norm_rho2_u: float
    norm_etaA_dxu: float
    norm_etaA_u: float
    norm_rho_v: float
    I: float
    J: float
    K: float
    ortho_residual_max: float
    coercivity_ratio: float


RECORD_FIELDS = tuple(f.name for f in fields(DiagnosticsRecord))


@dataclass
class FrameDiagnostics:
    record: DiagnosticsRecord
    weighted_u2: float
    orbital_distance: float
    u_ratio: float | None
    v_ratio: float | None


def frame_diagnostics(grid: Grid, frame: ModulationFrame, psi: np.ndarray, cfg: ExperimentConfig,
                      weights) -> FrameDiagnostics:
    p = frame.params
    u = frame.u
    ops = SolitonOperators(p.omega, grid)
    v = transform_v(u, p.omega, cfg.weights.alpha, grid, ops)
    c = conserved(grid, psi)
    I, J, K = functionals(u, v, weights)
    coer = coercivity_monitor(u, p.omega, weights, v)
    ratio = coer["ratio"]
    du = spectral_derivative(grid, u, 1)
    rec = DiagnosticsRecord(
        t=float(frame.t), beta=p.beta, sigma=p.sigma, gamma=p.gamma, omega=p.omega,
        mass=c.mass, momentum=c.momentum, energy=c.energy,
        norm_rho2_u=norm(grid, weights.rho ** 2 * u),
        norm_etaA_dxu=norm(grid, weights.eta_A * du),
        norm_etaA_u=norm(grid, weights.eta_A * u),
        norm_rho_v=norm(grid, weights.rho * v),
        I=float(I), J=float(J), K=float(K),
        ortho_residual_max=float(np.max(frame.ortho_residuals)),
        coercivity_ratio=float("nan") if ratio is None else ratio,
    )
    # H^1 distance to the unboosted omega0 orbit through the frame's (gamma, sigma)
    diff = np.exp(1j * p.beta * grid.x) * (sol.phi(grid.x, p.omega) + u) - sol.phi(grid.x, cfg.omega0)
    dist = math.sqrt(norm(grid, diff) ** 2 + norm(grid, spectral_derivative(grid, diff, 1)) ** 2)
    return FrameDiagnostics(rec, weighted_u_norm(grid, u, p.omega), dist,
                            coer["u1_ratio"], coer["u2_ratio"])


# --- the experiment -------------------------------------------------------------------

class ExperimentAborted(RuntimeError):
    def __init__(self, message, records, summary):
        super().__init__(message)
        self.records = records
        self.summary = summary


def iter_diagnostics(cfg: ExperimentConfig) -> Iterator[FrameDiagnostics]:
    """Evolve, decompose and measure, one recorded frame at a time."""
    grid = cfg.grid.build()
    weights = build_weights(cfg.weights, grid)
    psi0 = initial_field(cfg, grid)
    frames = iter_evolve(psi0, cfg.evolution, grid)
    held = {}

    def tap():
        for t, psi in frames:
            held["psi"] = psi
            yield t, psi

    guess = sol.FullParams(cfg.omega0)
    for frame in decompose_trajectory(grid, tap(), guess):
        yield frame_diagnostics(grid, frame, held["psi"], cfg, weights)


def _window(t, y, lo, hi):
    m = (t >= lo - 1e-12) & (t <= hi + 1e-12)
    return t[m], y[m]


def _oscillation(t, y, lo, hi):
    _, w = _window(t, y, lo, hi)
    return float(np.max(np.abs(w - w[-1]))) if w.size else float("nan")


def _spread(vals) -> dict:
    """max, median and the max < 2 median test of a ratio series."""
    if not vals.size:
        return {"max": float("nan"), "median": float("nan"), "bounded": False, "n": 0}
    mx, med = float(np.max(vals)), float(np.median(vals))
    return {"max": mx, "median": med, "bounded": bool(mx < 2 * med), "n": int(vals.size)}


def summarize(cfg: ExperimentConfig, diags: list[FrameDiagnostics], runtime: float = float("nan"),
              grid: Grid | None = None) -> dict:
    recs = [d.record for d in diags]
    t = np.array([r.t for r in recs])
    T = float(t[-1])
    col = lambda name: np.array([getattr(r, name) for r in recs])
    om0 = cfg.omega0
    norms = {
        "etaA_dxu_sq": col("norm_etaA_dxu") ** 2,
        "omega0^3_etaA_u_sq": om0 ** 3 * col("norm_etaA_u") ** 2,
        "omega0_rho2_u_sq": om0 * col("norm_rho2_u") ** 2,
    }
    integrals = {}
    for name, y in norms.items():
        integrals[name] = {"early": float(trapezoid(*_window(t, y, 0, T / 2)[::-1])),
                           "late": float(trapezoid(*_window(t, y, T / 2, T)[::-1]))}
    om, be = col("omega"), col("beta")
    coer = col("coercivity_ratio")
    cons = {}
    for name in ("mass", "momentum", "energy"):
        y = col(name)
        # momentum starts near zero, so it is measured against the mass
        scale = abs(col("mass")[0]) if name == "momentum" else abs(y[0])
        cons[name] = float(np.max(np.abs(y - y[0])) / max(scale, 1e-300))
    rate_const = float("nan")
    if len(recs) >= 5:
        P = np.column_stack([be, col("sigma"), col("gamma"), om])
        rates = rate_report(t, P, [d.weighted_u2 for d in diags])
        rate_const = rates.constant()
    dist = np.array([d.orbital_distance for d in diags])
    eps_size = cfg.epsilon
    early, late = integrals["omega0_rho2_u_sq"]["early"], integrals["omega0_rho2_u_sq"]["late"]
    u_max = float(max(np.max(col("norm_rho2_u")), np.max(col("norm_etaA_u"))))
    summary = {
        "T": T,
        "n_frames": len(recs),
        "runtime_s": runtime,
        "final": {"beta": float(be[-1]), "omega": float(om[-1]),
                  "sigma": float(col("sigma")[-1]), "gamma": float(col("gamma")[-1])},
        "tail_omega_oscillation": _oscillation(t, om, T - 10, T),
        "tail_beta_oscillation": _oscillation(t, be, T - 10, T),
        "omega_T_minus_omega_T10": float(abs(om[-1] - np.interp(T - 10, t, om))) if T >= 10 else float("nan"),
        "beta_T_minus_beta_T10": float(abs(be[-1] - np.interp(T - 10, t, be))) if T >= 10 else float("nan"),
        "half_time_tail_omega_oscillation": _oscillation(t, om, T / 2 - 10, T / 2),
        "half_time_tail_beta_oscillation": _oscillation(t, be, T / 2 - 10, T / 2),
        "weighted_norm_integrals": integrals,
        "decay_passed": bool(late < early) if cfg.epsilon > 0 else bool(u_max < 1e-8),
        "u_norm_max": u_max,
        "coercivity": _spread(coer[(t >= 1.0) & np.isfinite(coer)]),
        "coercivity_1_50": _spread(coer[(t >= 1.0) & (t <= 50.0) & np.isfinite(coer)]),
        "modulation_rate_constant": rate_const,
        "conserved_relative_drift": cons,
        "ortho_residual_max": float(np.max(col("ortho_residual_max"))),
        "orbital_distance_max": float(np.max(dist)),
        "orbital_multiple": float(np.max(dist) / eps_size) if eps_size > 0 else float("nan"),
    }
    if grid is not None:
        summary["wraparound_time_estimate"] = wraparound_time(grid, initial_field(cfg, grid))
    tail_ok = (summary["omega_T_minus_omega_T10"] < 1e-4 and summary["beta_T_minus_beta_T10"] < 1e-4)
    summary["tail_converged"] = bool(tail_ok)
    return summary


def run_experiment(cfg: ExperimentConfig) -> tuple[list[DiagnosticsRecord], dict]:
    """Run the perturbation experiment; if ``cfg.out_dir`` is set, results are
    written there, and partial results are written on a modulation failure."""
    start = time.perf_counter()
    diags: list[FrameDiagnostics] = []
    try:
        for d in iter_diagnostics(cfg):
            diags.append(d)
    except ModulationError as exc:
        records = [d.record for d in diags]
        summary = {"aborted": True, "error": str(exc), "frames_completed": len(diags)}
        if diags:
            summary.update(summarize(cfg, diags, time.perf_counter() - start))
            summary["aborted"] = True
        if cfg.out_dir:
            emit(records, summary, cfg.out_dir, cfg)
        raise ExperimentAborted(str(exc), records, summary) from exc
    summary = summarize(cfg, diags, time.perf_counter() - start, cfg.grid.build())
    records = [d.record for d in diags]
    if cfg.out_dir:
        emit(records, summary, cfg.out_dir, cfg)
    return records, summary


# --- persistence -------------------------------------------------------------------------

def _code_version() -> str:
    try:
        rev = subprocess.run(["git", "rev-parse", "--short", "HEAD"], capture_output=True,
                             text=True, cwd=Path(__file__).parent, timeout=5)
        if rev.returncode == 0:
            return f"{__version__}+{rev.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


TOLERANCES = {
    "modulation_tol": 1e-12,
    "resolution_top_octave": 1e-8,
    "norm_floor": 1e-14,
}


def write_records(records: list[DiagnosticsRecord], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(RECORD_FIELDS)
        for r in records:
            w.writerow([repr(float(getattr(r, k))) for k in RECORD_FIELDS])


def read_records(path: str | os.PathLike) -> list[DiagnosticsRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != RECORD_FIELDS:
        raise ValueError(f"unexpected header {rows[0]}")
    return [DiagnosticsRecord(*(float(v) for v in row)) for row in rows[1:]]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def emit(records, summary, out_dir, cfg: ExperimentConfig | None = None) -> dict:
    """Write records.csv, summary.json and manifest.json; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"records": out / "records.csv", "summary": out / "summary.json",
             "manifest": out / "manifest.json"}
    write_records(records, paths["records"])
    paths["summary"].write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    manifest = {
        "code_version": _code_version(),
        "record_fields": list(RECORD_FIELDS),
        "tolerances": TOLERANCES,
    }
    if cfg is not None:
        manifest["config"] = _jsonable(cfg.to_dict())
        manifest["config_keys"] = config_keys()
        manifest["grid"] = {"n_points": cfg.grid.n_points, "length": cfg.grid.length,
                            "spacing": cfg.grid.length / cfg.grid.n_points}
        manifest["epsilon_note"] = "epsilon is the H^1 size of the initial perturbation"
    paths["manifest"].write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")
    return {k: str(v) for k, v in paths.items()}


# --- verification battery ------------------------------------------------------------------

@dataclass(frozen=True)
class VerifyConfig:
    omegas: tuple = (0.0625, 0.09375, 0.125)
    weights: WeightSpec = field(default_factory=WeightSpec)
    phi_scale: float = 1.0            # fault injection: multiply the sampled profile
    include_modes: bool = True


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    explicit: bool = True
    note: str = ""
    direction: str = "<"      # value must stay below ("<") or above (">") the threshold

    @property
    def margin(self) -> float:
        """Positive when the check holds with room to spare."""
        d = self.threshold - self.value
        return d if self.direction == "<" else -d


def _lt(name, value, threshold, explicit=True, note=""):
    value = float(value)
    return Check(name, value, float(threshold), bool(value < threshold), explicit, note)


def verify_all(cfg: VerifyConfig = VerifyConfig()) -> dict:
    """Run every module check; returns {"checks": [...], "passed": bool}.

    ``passed`` only considers checks with explicit thresholds.
    """
    checks: list[Check] = []

    for om in cfg.omegas:
        res = sol.profile_residual(om, default_grid(om), scale=cfg.phi_scale)
        checks.append(_lt(f"soliton ODE residual omega={om}", res, 1e-10))

    grid = default_grid(0.125)
    probes = list(corpus(grid, 0.125).values())
    ident = operators.identity_residuals(0.125, probes, grid)
    for k, v in ident["residuals"].items():
        checks.append(_lt(f"identity {k}", v, operators.IDENTITY_THRESHOLDS[k]))

    for om in (0.0625, 0.125):
        lp = spectral.spectrum("Lplus", om, k=4)
        checks.append(Check(f"L+ negative count omega={om}", lp.negative_count, 1,
                            lp.negative_count == 1))
        lm = spectral.spectrum("Lminus", om, k=4)
        checks.append(_lt(f"L- ground |lambda0| omega={om}", abs(lm.eigenvalues[0]), 1e-6))
        checks.append(Check(f"L- kernel alignment omega={om}", lm.kernel_alignment, 0.9999,
                            lm.kernel_alignment > 0.9999, direction=">"))
        mm = spectral.spectrum("Mminus", om, k=2)
        checks.append(Check(f"M- ground - omega omega={om}", mm.eigenvalues[0] - om, -1e-8,
                            mm.eigenvalues[0] >= om - 1e-8, direction=">"))
        fine = spectral.spectrum("Lplus", om, k=4, n_points=2048)
        checks.append(_lt(f"L+ refinement movement omega={om}",
                          np.max(np.abs(fine.eigenvalues - lp.eigenvalues)), 1e-6))
        if cfg.include_modes:
            rep = spectral.internal_mode_scan(om)
            checks.append(Check(f"persistent internal modes omega={om}", rep.persistent_count, 0,
                                rep.persistent_count == 0 and rep.inconclusive_count == 0))

    for om in (0.0625, 0.125):
        g = default_grid(om)
        hs = spectral.homogeneous_for(om, g)
        wr = max(hs.wronskian_residuals["G_max"], hs.wronskian_residuals["H_max"])
        checks.append(_lt(f"Wronskian residual omega={om}", wr, 1e-8))
        ops = operators.operators_for(om, g)
        worst_p = worst_m = 0.0
        p1 = sol.dphi(g.x, om)
        for f in corpus(g, om).values():
            W = spectral.project_out(g, f, p1)
            U = spectral.invert_Lplus(W, om, g)
            worst_p = max(worst_p, float(np.max(np.abs(ops.Lplus(U) - W))))
            Mg = ops.Mminus(f)
            rec = spectral.invert_Mminus(Mg, om, g)
            worst_m = max(worst_m, float(np.max(np.abs(ops.Mminus(rec) - Mg))))
        checks.append(_lt(f"L+ I+[W] - W omega={om}", worst_p, 1e-7))
        checks.append(_lt(f"M- J-[M- g] - M- g omega={om}", worst_m, 1e-7))

    rep = virial.bounds_report(cfg.weights)
    l3, l45, app = rep["P_R"], rep["quartic"], rep["scalar"]

    def bound_check(name, entry, strict=True):
        return Check(name, entry["value"], entry["bound"], entry["passed"])

    checks.append(bound_check("sup P_B <= omega0/5", l3["sup_P_B"]))
    checks.append(bound_check("sup P_B <= 7 omega0/27", l3["sup_P_B_sharp"]))
    checks.append(bound_check("sup R_B <= 7/18", l3["sup_R_B"]))
    checks.append(_lt("R_B ODE residual", l3["ode_residual"], 1e-8))
    for name, row in l45["probes"].items():
        e = row["quartic"]
        checks.append(Check(f"quartic inequality, probe {name}", e["value"], e["bound"], e["passed"]))
    op = l45["operator"]
    checks.append(Check("quartic inequality, lowest eigenvalue", op["lowest_eigenvalue"], 0.0,
                        op["holds"], direction=">", note=f"sharp constant {op['sharp_constant']:.6g}"))
    checks.append(bound_check("quartic ratio <= 4 omega0", l45["ratio_bound_4_omega0"]))
    checks.append(bound_check("quartic ratio <= 1/2", l45["ratio_bound_half"]))
    checks.append(Check("P_B floor c on [1,2] (measured)", l45["P_B_floor_c"], 0.0, l45["P_B_floor_c"] > 0, False,
                        direction=">"))
    checks.append(Check("rho-weighted Poincare C (measured)", l45["std_C_max"], math.inf, True, False))
    for k in ("sinh_cubic", "sinh_linear", "fact_15a", "fact_12a2", "fact_1_05"):
        checks.append(bound_check(f"scalar {k}", app[k]))
    for k, v in rep["smoothing"]["constants"].items():
        checks.append(Check(f"smoothing {k} C (measured)", v, math.inf, True, False))
    for k, e in rep["smoothing"]["explicit"].items():
        checks.append(Check(f"smoothing {k} <= 1", e["value"], e["bound"], e["passed"]))
    checks.append(Check("v size C_v (measured)", rep["v_size"]["C_v"], math.inf, True, False))
    checks.append(Check("v size C_dv (measured)", rep["v_size"]["C_dv"], math.inf, True, False))

    explicit_ok = all(c.passed for c in checks if c.explicit)
    return {"checks": checks, "passed": explicit_ok, "bounds": rep}


def format_table(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    lines = [f"{'check':<{width}}  {'value':>13}  {'bound':>15}  {'margin':>13}  result"]
    for c in checks:
        tag = ("PASS" if c.passed else "FAIL") if c.explicit else "info"
        if math.isfinite(c.threshold):
            bound, margin = f"{c.direction} {c.threshold:.6g}", f"{c.margin:.6g}"
        else:
            bound, margin = "-", "-"
        lines.append(f"{c.name:<{width}}  {c.value:>13.6g}  {bound:>15}  {margin:>13}  "
                     f"{tag}{'  ' + c.note if c.note else ''}")
    return "\n".join(lines)


# --- trajectory dumps ----------------------------------------------------------------------

def write_trajectory(cfg: ExperimentConfig, out_dir: str | os.PathLike) -> dict:
    """Evolve the configured initial field and stream every recorded frame to
    trajectory.bin (little-endian float64, re/im interleaved) with a JSON
    header and a conserved-quantities CSV."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = cfg.grid.build()
    psi0 = initial_field(cfg, grid)
    times = []
    with open(out / "trajectory.bin", "wb") as fb, \
            open(out / "conserved.csv", "w", newline="") as fc:
        wc = csv.writer(fc, lineterminator="\r\n")
        wc.writerow(("t", "mass", "momentum", "energy"))
        for t, psi in iter_evolve(psi0, cfg.evolution, grid):
            inter = np.empty(2 * grid.n_points, dtype="<f8")
            inter[0::2], inter[1::2] = psi.real, psi.imag
            fb.write(inter.tobytes())
            c = conserved(grid, psi)
            wc.writerow([repr(float(v)) for v in (t, c.mass, c.momentum, c.energy)])
            times.append(float(t))
    header = {"n_points": grid.n_points, "length": grid.length, "dt": cfg.evolution.dt,
              "record_stride": cfg.evolution.record_stride, "frame_count": len(times),
              "times": times, "omega0": cfg.omega0, "dtype": "<f8", "layout": "re,im interleaved"}
    (out / "trajectory.json").write_text(json.dumps(header, indent=2) + "\n")
    return header


def read_trajectory(path: str | os.PathLike) -> tuple[Grid, dict, Iterator[tuple[float, np.ndarray]]]:
    path = Path(path)
    header = json.loads((path / "trajectory.json").read_text())
    grid = Grid(int(header["n_points"]), float(header["length"]))
    data = np.memmap(path / "trajectory.bin", dtype="<f8", mode="r").reshape(
        header["frame_count"], 2 * grid.n_points)

    def frames():
        for t, row in zip(header["times"], data):
            yield t, row[0::2] + 1j * row[1::2]

    return grid, header, frames()
