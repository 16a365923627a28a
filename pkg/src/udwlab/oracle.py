"""Independent ground truth: direct quadrature of the first-order amplitude.

The transition probability to first order is

    P(t_end) = | int_0^t_end g0 chi(t) exp(i [omega_p t +/- (omega_q/alpha) ln(alpha t + C)]) dt |^2

('+' excitation, '-' emission).  The integrand has unit-modulus phases, so
|integrand| = g0 chi(t) everywhere.  Quadrature is oscillation-aware: panel
widths are capped by the field period, the switching time, and the
instantaneous chirp rate omega_q/(alpha t + C); for C = 0 the chirp cap makes
the panels geometrically graded toward the t = 0 phase singularity, where a
short analytic head integral covers [0, eps).  Infinite upper limits are cut
once the remaining envelope integral is negligible (g0 * tail < 1e-14).

This module never consults the closed forms it is used to validate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from .hamiltonians import ModelParams

__all__ = [
    "AmplitudeIntegrand",
    "OracleResult",
    "transition_probability_quadrature",
    "transition_probability_series",
]

# phase change per panel from either the field frequency or the chirp rate
_PHASE_PER_PANEL = 2.0 * math.pi / 10.0
# panels per switching time
_PANELS_PER_TD = 50
# drop the infinite tail once g0 * integral of the remaining envelope < this
_TAIL_AMPLITUDE = 1e-14
# analytic head for the C = 0 phase singularity
_HEAD_EPS = 1e-10

_N16, _W16 = leggauss(16)
_N8, _W8 = leggauss(8)
_MAX_SPLIT_ROUNDS = 24


@dataclass(frozen=True)
class AmplitudeIntegrand:
    """g0 chi(t) e^{i phi(t)} with phi(t) = omega_p t +/- (omega_q/alpha) ln(alpha t + C)."""

    process: str
    params: ModelParams

    def __post_init__(self):
        if self.process not in ("excitation", "emission"):
            raise ValueError(f"unknown process {self.process!r}")
        if self.params.alpha <= 0:
            raise ValueError("amplitude integrand requires alpha > 0")

    @property
    def sign(self) -> float:
        return +1.0 if self.process == "excitation" else -1.0

    def phase(self, t):
        p = self.params
        return p.omega_p * t + self.sign * (p.omega_q / p.alpha) * np.log(p.alpha * t + p.C)

    def envelope(self, t):
        p = self.params
        return p.g0 * (np.exp(-np.asarray(t, dtype=float) / p.T_d)
                       if p.switching == "exponential" else np.ones_like(np.asarray(t, float)))

    def unit_values(self, t):
        """chi(t) e^{i phi(t)} (envelope without the g0 factor)."""
        p = self.params
        chi = np.exp(-t / p.T_d) if p.switching == "exponential" else 1.0
        return chi * np.exp(1j * self.phase(t))


class OracleResult(NamedTuple):
    value: float
    est_error: float
    n_panels: int
    t_cut: float


def _panel_edges(params: ModelParams, t0: float, t1: float) -> np.ndarray:
    """Oscillation-aware breakpoints covering [t0, t1]."""
    cap = _PHASE_PER_PANEL / params.omega_p
    if params.switching == "exponential":
        cap = min(cap, params.T_d / _PANELS_PER_TD)
    edges = [t0]
    t = t0
    while t < t1:
        chirp_cap = _PHASE_PER_PANEL * (params.alpha * t + params.C) / params.omega_q
        w = min(cap, chirp_cap) if chirp_cap > 0 else cap
        w = max(w, 1e-18)
        t = min(t + w, t1)
        edges.append(t)
    return np.asarray(edges)


def _integrate_panels(integrand: AmplitudeIntegrand, edges: np.ndarray):
    """Per-panel unit-envelope integrals and error estimates (vectorized)."""
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    t16 = mid[:, None] + half[:, None] * _N16[None, :]
    t8 = mid[:, None] + half[:, None] * _N8[None, :]
    v16 = half * (integrand.unit_values(t16) @ _W16)
    v8 = half * (integrand.unit_values(t8) @ _W8)
    return v16, np.abs(v16 - v8)


def _refine(integrand: AmplitudeIntegrand, edges: np.ndarray, tol_per_panel: float):
    """Bisect panels until every error estimate is below tolerance."""
    vals, ests = _integrate_panels(integrand, edges)
    for _ in range(_MAX_SPLIT_ROUNDS):
        bad = ests > tol_per_panel
        if not np.any(bad):
            break
        new_edges = [edges[0]]
        for i in range(len(edges) - 1):
            if bad[i]:
                new_edges.append(0.5 * (edges[i] + edges[i + 1]))
            new_edges.append(edges[i + 1])
        edges = np.asarray(new_edges)
        vals, ests = _integrate_panels(integrand, edges)
    return edges, vals, ests


def _head_integral(integrand: AmplitudeIntegrand, eps: float):
    """Analytic integral over [0, eps) for C = 0, where the phase derivative
    diverges like 1/t: int_0^eps e^{-z t}(alpha t)^{i s nu} dt expanded in z t."""
    p = integrand.params
    z = (1.0 / p.T_d if p.switching == "exponential" else 0.0) - 1j * p.omega_p
    ex = 1j * integrand.sign * p.omega_q / p.alpha
    a_pow = np.exp(ex * math.log(p.alpha))  # alpha^{i s nu}
    e_pow = np.exp((1.0 + ex) * math.log(eps))
    head = a_pow * e_pow * (1.0 / (1.0 + ex)
                            - z * eps / (2.0 + ex)
                            + z * z * eps * eps / (2.0 * (3.0 + ex)))
    est = abs(z) ** 3 * eps ** 4 / 6.0
    return head, est


def _t_cut(params: ModelParams, t_end: float) -> float:
    if math.isinf(t_end):
        if params.switching != "exponential":
            raise ValueError(
                "t_end = infinity requires exponential switching (integrable envelope)"
            )
        if params.g0 == 0:
            return 0.0
        return params.T_d * math.log(params.g0 * params.T_d / _TAIL_AMPLITUDE)
    return t_end


def _amplitude(integrand: AmplitudeIntegrand, t_lo: float, t_hi: float,
               tol_per_panel: float = 1e-16):
    """Unit-envelope amplitude integral over [t_lo, t_hi] plus error estimate."""
    if t_hi <= t_lo:
        return 0.0 + 0.0j, 0.0, 0
    p = integrand.params
    head = 0.0 + 0.0j
    head_est = 0.0
    if p.C == 0.0 and t_lo == 0.0:
        eps = min(_HEAD_EPS, 0.5 * t_hi)
        head, head_est = _head_integral(integrand, eps)
        t_lo = eps
    edges = _panel_edges(p, t_lo, t_hi)
    edges, vals, ests = _refine(integrand, edges, tol_per_panel)
    return head + vals.sum(), head_est + ests.sum(), len(vals)


def transition_probability_quadrature(process: str, params: ModelParams,
                                      t_end: float = math.inf) -> OracleResult:
    """First-order P(t_end) by adaptive oscillation-aware panel quadrature.

    Returns the probability, an absolute error estimate, the panel count and
    the effective upper integration limit.
    """
    if params.g0 == 0:
        return OracleResult(0.0, 0.0, 0, 0.0)
    integrand = AmplitudeIntegrand(process, params)
    t_hi = _t_cut(params, t_end)
    amp, amp_est, n_pan = _amplitude(integrand, 0.0, t_hi)
    tail_est = 0.0
    if math.isinf(t_end):
        tail_est = params.T_d * math.exp(-t_hi / params.T_d)
    value = params.g0 ** 2 * abs(amp) ** 2
    est = params.g0 ** 2 * (2.0 * abs(amp) + amp_est + tail_est) * (amp_est + tail_est)
    return OracleResult(float(value), float(est), n_pan, t_hi)


def transition_probability_series(process: str, params: ModelParams,
                                  grid) -> np.ndarray:
    """P(t_i) on an increasing grid, reusing accumulated panels.

    Equivalent to a single-shot quadrature at each grid time; the running
    amplitude is advanced segment by segment so the whole series costs one
    pass over [0, t_max].
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a non-empty 1-D array")
    if np.any(np.diff(grid) <= 0) or grid[0] < 0:
        raise ValueError("grid must be strictly increasing from t >= 0")
    if params.g0 == 0:
        return np.zeros_like(grid)
    integrand = AmplitudeIntegrand(process, params)
    out = np.empty(grid.size)
    acc = 0.0 + 0.0j
    t_prev = 0.0
    for i, t in enumerate(grid):
        seg, _, _ = _amplitude(integrand, t_prev, t)
        acc += seg
        out[i] = params.g0 ** 2 * abs(acc) ** 2
        t_prev = t
    return out
