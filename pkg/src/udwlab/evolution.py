"""Numerically exact propagation under time-dependent Hamiltonians.

Two independent integrator families guard against silent tolerance failures:
an adaptive embedded Runge-Kutta method (DOP853) on the complex state vector,
and fixed-step exponential propagators that are unconditionally unitary (the
classic midpoint rule, second order, and a two-exponential fourth-order
commutator-free scheme for cross-checks at tight tolerances).
"""

from __future__ import annotations

import math
import warnings as _warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from ._fastpath import make_lindblad_rhs, make_schrodinger_rhs
from .core import DENSITY, PURE, HilbertSpec, Operator, QuantumState, ladder_ops, spin_ops
from .hamiltonians import TimeDependentHamiltonian

__all__ = [
    "ADAPTIVE",
    "MIDPOINT",
    "CF4",
    "IntegratorConfig",
    "LindbladTerms",
    "Trajectory",
    "evolve_schrodinger",
    "evolve_lindblad",
    "transition_probability",
    "trajectory_csv",
    "figure_grid",
]

ADAPTIVE = "adaptive-embedded-RK"
MIDPOINT = "fixed-step-midpoint-exponential"
CF4 = "fixed-step-cf4-exponential"

NORM_DRIFT_TOL = 1e-8
TOP_FOCK_TOL = 1e-6
TRACE_DRIFT_TOL = 1e-7
POSITIVITY_FLOOR = -1e-8


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = ADAPTIVE
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float | None = None
    fixed_step: float | None = None

    def __post_init__(self):
        if self.method not in (ADAPTIVE, MIDPOINT, CF4):
            raise ValueError(f"unknown integrator method {self.method!r}")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.method != ADAPTIVE:
            if self.fixed_step is None or self.fixed_step <= 0:
                raise ValueError(f"{self.method} requires an explicit fixed_step > 0")
            if self.max_step is not None and self.fixed_step > self.max_step:
                raise ValueError("fixed_step must not exceed max_step")


@dataclass(frozen=True)
class LindbladTerms:
    """Collapse operators with rates; roles built by :meth:`from_rates`."""

    items: tuple = ()
    roles: tuple = ()

    def __post_init__(self):
        for op, rate in self.items:
            if rate < 0:
                raise ValueError("Lindblad rates must be >= 0")
            if not isinstance(op, Operator):
                raise TypeError("collapse operators must be Operator instances")

    @classmethod
    def from_rates(cls, spec: HilbertSpec, dephasing: float = 0.0, decay: float = 0.0,
                   heating: float = 0.0, damping: float = 0.0) -> "LindbladTerms":
        """Spin dephasing (sigma_z), spin decay (sigma_-), phonon heating (b'),
        phonon damping (b), each with its rate in 1/s."""
        sz, _, _, sm = spin_ops(spec)
        b, bd = ladder_ops(spec)
        items, roles = [], []
        for name, op, rate in (("dephasing", sz, dephasing), ("decay", sm, decay),
                               ("heating", bd, heating), ("damping", b, damping)):
            if rate:
                items.append((op, float(rate)))
                roles.append((name, float(rate)))
        return cls(items=tuple(items), roles=tuple(roles))

    @property
    def total_rate(self) -> float:
        return sum(r for _, r in self.items)


@dataclass(frozen=True)
class Trajectory:
    """Per-time observables of one propagation."""

    times: np.ndarray
    P_g: np.ndarray
    P_e: np.ndarray
    mean_n: np.ndarray
    norm_or_trace: np.ndarray
    top_fock_pop: np.ndarray
    initial_label: str
    model_label: str
    warnings: tuple = ()
    final_state: np.ndarray | None = field(default=None, repr=False, compare=False)


def figure_grid(t_end: float = 1e-3, dt: float = 1e-6) -> np.ndarray:
    """Microsecond-sampled time grid used by the figure recipes."""
    n = int(round(t_end / dt))
    return np.linspace(0.0, t_end, n + 1)


def _check_grid(grid: np.ndarray):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("grid must be a 1-D array with at least two times")
    if grid[0] < 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing from t0 >= 0")
    return grid


def _effective_max_step(h: TimeDependentHamiltonian, cfg: IntegratorConfig) -> float:
    steps = [s for s in (cfg.max_step, h.forced_max_step) if s is not None]
    return min(steps) if steps else np.inf


def _ket_observables(states: np.ndarray, n_fock: int):
    pops = np.abs(states) ** 2
    pg = pops[:n_fock].sum(axis=0)
    pe = pops[n_fock:].sum(axis=0)
    nvec = np.arange(n_fock, dtype=float)
    mean_n = nvec @ pops[:n_fock] + nvec @ pops[n_fock:]
    norm = np.sqrt(pg + pe)
    top = pops[n_fock - 1] + pops[-1]
    return pg, pe, mean_n, norm, top


# ---------------------------------------------------------------------------
# unitary propagation
# ---------------------------------------------------------------------------

def _expm_apply(hmat: np.ndarray, dt: float, y: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(hmat)
    return v @ (np.exp(-1j * w * dt)[:, None] * (v.conj().T @ y))

# fourth-order commutator-free coefficients (Gauss nodes)
_CF4_C1 = 0.5 - math.sqrt(3.0) / 6.0
_CF4_C2 = 0.5 + math.sqrt(3.0) / 6.0
_CF4_A1 = 0.25 + math.sqrt(3.0) / 6.0
_CF4_A2 = 0.25 - math.sqrt(3.0) / 6.0


def _fixed_step_segment(h, t0, t1, y, step, method):
    n_sub = max(1, math.ceil((t1 - t0) / step))
    dt = (t1 - t0) / n_sub
    for i in range(n_sub):
        t = t0 + i * dt
        if method == MIDPOINT:
            hm = h.evaluate(t + 0.5 * dt).entries
            y = _expm_apply(hm, dt, y)
        else:  # CF4
            h1 = h.evaluate(t + _CF4_C1 * dt).entries
            h2 = h.evaluate(t + _CF4_C2 * dt).entries
            y = _expm_apply(_CF4_A1 * h1 + _CF4_A2 * h2, dt, y)
            y = _expm_apply(_CF4_A2 * h1 + _CF4_A1 * h2, dt, y)
    return y


def _propagate_states(h: TimeDependentHamiltonian, y0: np.ndarray, grid: np.ndarray,
                      cfg: IntegratorConfig) -> np.ndarray:
    """Return the state at every grid time, shape (dim*m, len(grid))."""
    if cfg.method == ADAPTIVE:
        rhs = make_schrodinger_rhs(h)
        sol = solve_ivp(rhs, (grid[0], grid[-1]), y0, method="DOP853",
                        rtol=cfg.rel_tol, atol=cfg.abs_tol,
                        max_step=_effective_max_step(h, cfg), t_eval=grid)
        if not sol.success:
            t_fail = sol.t[-1] if sol.t.size else grid[0]
            raise RuntimeError(
                f"adaptive integration failed near t = {t_fail:.6e} s: {sol.message}"
            )
        return sol.y
    step = cfg.fixed_step
    eff = _effective_max_step(h, cfg)
    if np.isfinite(eff):
        step = min(step, eff)
    d = h.spec.dim
    y = y0.reshape(d, -1).astype(np.complex128)
    out = np.empty((y0.size, grid.size), dtype=np.complex128)
    out[:, 0] = y0
    for i in range(grid.size - 1):
        y = _fixed_step_segment(h, grid[i], grid[i + 1], y, step, cfg.method)
        out[:, i + 1] = y.ravel()
    return out


def evolve_schrodinger(h: TimeDependentHamiltonian, psi0: QuantumState,
                       grid, cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Propagate a pure state and sample observables on the grid.

    The trajectory attaches warnings when the final norm drifts beyond 1e-8
    or the top Fock level accumulates more than 1e-6 population (truncation).
    """
    grid = _check_grid(grid)
    if not psi0.is_pure:
        raise ValueError("evolve_schrodinger requires a pure state")
    states = _propagate_states(h, psi0.entries.copy(), grid, cfg)
    n_fock = h.spec.fock_cutoff
    pg, pe, mean_n, norm, top = _ket_observables(states, n_fock)
    warns = []
    drift = abs(norm[-1] - 1.0)
    if drift > NORM_DRIFT_TOL:
        warns.append(f"norm drift {drift:.3e} exceeds {NORM_DRIFT_TOL:.0e}")
    top_max = float(top.max())
    if top_max > TOP_FOCK_TOL:
        warns.append(
            f"truncation: top Fock level population {top_max:.3e} exceeds {TOP_FOCK_TOL:.0e}"
        )
    return Trajectory(times=grid, P_g=pg, P_e=pe, mean_n=mean_n, norm_or_trace=norm,
                      top_fock_pop=top, initial_label=psi0.label, model_label=h.label,
                      warnings=tuple(warns), final_state=states[:, -1])


def evolve_lindblad(h: TimeDependentHamiltonian, rho0: QuantumState, terms: LindbladTerms,
                    grid, cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Master-equation propagation; with all rates zero this coincides with
    the unitary evolution of the purification."""
    grid = _check_grid(grid)
    if cfg.method != ADAPTIVE:
        raise ValueError("density-matrix propagation supports the adaptive method only")
    rho = rho0.density().astype(np.complex128)
    d = h.spec.dim
    ops = [op.entries for op, _ in terms.items]
    rates = [r for _, r in terms.items]
    rhs = make_lindblad_rhs(h, ops, rates)
    sol = solve_ivp(rhs, (grid[0], grid[-1]), rho.ravel(), method="DOP853",
                    rtol=cfg.rel_tol, atol=cfg.abs_tol,
                    max_step=_effective_max_step(h, cfg), t_eval=grid)
    if not sol.success:
        t_fail = sol.t[-1] if sol.t.size else grid[0]
        raise RuntimeError(f"master-equation integration failed near t = {t_fail:.6e} s")
    n_fock = h.spec.fock_cutoff
    n_t = grid.size
    diag = np.empty((d, n_t))
    warns = []
    worst_neg = 0.0
    t_neg = None
    for i in range(n_t):
        r = sol.y[:, i].reshape(d, d)
        diag[:, i] = np.real(np.diag(r))
        wmin = float(np.linalg.eigvalsh(0.5 * (r + r.conj().T)).min())
        if wmin < worst_neg:
            worst_neg, t_neg = wmin, grid[i]
    if worst_neg < POSITIVITY_FLOOR:
        warns.append(f"positivity: eigenvalue {worst_neg:.3e} at t = {t_neg:.3e} s")
    pg = diag[:n_fock].sum(axis=0)
    pe = diag[n_fock:].sum(axis=0)
    nvec = np.arange(n_fock, dtype=float)
    mean_n = nvec @ diag[:n_fock] + nvec @ diag[n_fock:]
    trace = pg + pe
    top = diag[n_fock - 1] + diag[-1]
    if abs(trace[-1] - 1.0) > TRACE_DRIFT_TOL:
        warns.append(f"trace drift {abs(trace[-1] - 1.0):.3e} exceeds {TRACE_DRIFT_TOL:.0e}")
    if float(top.max()) > TOP_FOCK_TOL:
        warns.append(f"truncation: top Fock level population {float(top.max()):.3e}")
    return Trajectory(times=grid, P_g=pg, P_e=pe, mean_n=mean_n, norm_or_trace=trace,
                      top_fock_pop=top, initial_label=rho0.label, model_label=h.label,
                      warnings=tuple(warns), final_state=sol.y[:, -1].reshape(d, d))


def transition_probability(traj: Trajectory, process: str) -> np.ndarray:
    """P_e series for the excitation process, P_g series for emission.

    The trajectory must start from the matching spin sector (|g,...> for
    excitation, |e,...> for emission); the phonon register is traced out.
    """
    spin = traj.initial_label[:1]
    if process == "excitation":
        if spin != "g":
            raise ValueError(f"excitation extraction requires a g-sector start, "
                             f"got initial state {traj.initial_label!r}")
        return traj.P_e
    if process == "emission":
        if spin != "e":
            raise ValueError(f"emission extraction requires an e-sector start, "
                             f"got initial state {traj.initial_label!r}")
        return traj.P_g
    raise ValueError(f"process must be 'excitation' or 'emission', got {process!r}")


def trajectory_csv(traj: Trajectory) -> str:
    """CSV dump with columns t_us, P_g, P_e, mean_n, norm (12 significant digits)."""
    lines = [
        f"# model = {traj.model_label}",
        f"# initial_state = {traj.initial_label}",
        "t_us,P_g,P_e,mean_n,norm",
    ]
    for i, t in enumerate(traj.times):
        lines.append(
            f"{t * 1e6:.12g},{traj.P_g[i]:.12g},{traj.P_e[i]:.12g},"
            f"{traj.mean_n[i]:.12g},{traj.norm_or_trace[i]:.12g}"
        )
    return "\n".join(lines) + "\n"
