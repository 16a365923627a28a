"""Seeded Monte Carlo over experimental imperfections.

Shot draws cover the thermal initial phonon occupation (n_bar uniform on a
range) and a random relative phase between the two drive tones; optional
Lindblad rates ride along.  Seeding uses numpy's SeedSequence with the shot
index as spawn key, a documented, platform-stable splitting rule, so runs are
bit-identical for a given base seed regardless of execution order.

The relative phase only affects the ion-frame model; the effective model is
phase-insensitive, and for it the thermal mixture is evaluated exactly by
evolving each needed Fock component once and reweighting per shot (the
master equation is linear in the initial state).  Bands are pointwise
min/max over shots; percentile bands are available but non-default.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .core import HilbertSpec, basis_ket, thermal_probabilities
from .evolution import (IntegratorConfig, LindbladTerms, _propagate_states,
                        _check_grid, _ket_observables, evolve_lindblad)
from .hamiltonians import TimeDependentHamiltonian

__all__ = ["NoiseConfig", "EnsembleResult", "sample_shot", "run_ensemble", "ensemble_csv"]

# ignore thermal components whose maximal weight across draws is below this
_COMPONENT_FLOOR = 1e-15


@dataclass(frozen=True)
class NoiseConfig:
    n_bar_range: tuple = (0.02, 0.07)
    phase_jitter: str = "uniform-on-circle"
    fixed_phase: float = 0.0
    lindblad: LindbladTerms = field(default_factory=LindbladTerms)
    shots: int = 200
    base_seed: int = 20260810

    def __post_init__(self):
        low, high = self.n_bar_range
        if not (0 <= low <= high):
            raise ValueError(f"need 0 <= low <= high in n_bar_range, got {self.n_bar_range}")
        if self.phase_jitter not in ("uniform-on-circle", "fixed"):
            raise ValueError(f"unknown phase_jitter {self.phase_jitter!r}")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")


class ShotDraw(NamedTuple):
    n_bar: float
    rel_phase: float
    shot_seed: tuple


def sample_shot(cfg: NoiseConfig, index: int) -> ShotDraw:
    """Deterministic draw for one shot: seed = SeedSequence(base_seed, spawn_key=(index,))."""
    if not 0 <= index < cfg.shots:
        raise ValueError(f"shot index {index} outside 0..{cfg.shots - 1}")
    seq = np.random.SeedSequence(cfg.base_seed, spawn_key=(index,))
    rng = np.random.default_rng(seq)
    low, high = cfg.n_bar_range
    n_bar = float(rng.uniform(low, high)) if high > low else float(low)
    if cfg.phase_jitter == "uniform-on-circle":
        rel_phase = float(rng.uniform(0.0, 2.0 * np.pi))
    else:
        rel_phase = float(cfg.fixed_phase)
    return ShotDraw(n_bar, rel_phase, (cfg.base_seed, index))


@dataclass(frozen=True)
class EnsembleResult:
    times: np.ndarray
    mean: np.ndarray
    band_low: np.ndarray
    band_high: np.ndarray
    shots: int
    base_seed: int
    seeds: tuple
    n_bars: np.ndarray
    rel_phases: np.ndarray
    process: str
    model_label: str


def _needed_components(spec: HilbertSpec, n_bar_high: float) -> list[int]:
    if n_bar_high == 0:
        return [0]
    p = thermal_probabilities(spec, n_bar_high)
    return [n for n in range(spec.fock_cutoff) if n == 0 or p[n] > _COMPONENT_FLOOR]


def _component_series(h: TimeDependentHamiltonian, spec: HilbertSpec, spin: str,
                      comps: list[int], grid, cfg: NoiseConfig,
                      integrator: IntegratorConfig) -> np.ndarray:
    """Transition-probability series for each initial |spin, n>, n in comps."""
    n_fock = spec.fock_cutoff
    want_pe = spin == "g"
    out = np.empty((len(comps), grid.size))
    if cfg.lindblad.total_rate > 0:
        for i, n in enumerate(comps):
            traj = evolve_lindblad(h, basis_ket(spec, spin, n), cfg.lindblad,
                                   grid, integrator)
            out[i] = traj.P_e if want_pe else traj.P_g
        return out
    # pure components evolve together as one state block
    y0 = np.zeros((spec.dim, len(comps)), dtype=np.complex128)
    for i, n in enumerate(comps):
        y0[spec.index(spin, n), i] = 1.0
    states = _propagate_states(h, y0.ravel(), grid, integrator)
    for i in range(len(comps)):
        block = states.reshape(spec.dim, len(comps), grid.size)[:, i, :]
        pg, pe, _, _, _ = _ket_observables(block, n_fock)
        out[i] = pe if want_pe else pg
    return out


def run_ensemble(model, process: str, cfg: NoiseConfig, grid,
                 spec: HilbertSpec | None = None,
                 integrator: IntegratorConfig = IntegratorConfig()) -> EnsembleResult:
    """Monte Carlo band for one process.

    ``model`` is either a fixed TimeDependentHamiltonian (phase-insensitive;
    only n_bar varies across shots) or a callable rel_phase -> Hamiltonian
    (the ion-frame builder).  Each shot starts from the spin projector for
    the process tensored with a thermal phonon state at the drawn n_bar.
    """
    if process not in ("excitation", "emission"):
        raise ValueError(f"unknown process {process!r}")
    grid = _check_grid(np.asarray(grid, dtype=float))
    phase_sensitive = not isinstance(model, TimeDependentHamiltonian)
    if spec is None:
        if phase_sensitive:
            raise ValueError("spec is required when model is a phase-parameterized family")
        spec = model.spec
    spin = "g" if process == "excitation" else "e"
    draws = [sample_shot(cfg, i) for i in range(cfg.shots)]
    n_high = max(d.n_bar for d in draws)
    comps = _needed_components(spec, n_high)
    weights = np.stack([thermal_probabilities(spec, d.n_bar)[comps] for d in draws])

    if not phase_sensitive:
        series = _component_series(model, spec, spin, comps, grid, cfg, integrator)
        shot_curves = weights @ series
        label = model.label
    else:
        shot_curves = np.empty((cfg.shots, grid.size))
        label = None
        for i, d in enumerate(draws):
            h = model(d.rel_phase)
            label = label or h.label
            try:
                series = _component_series(h, spec, spin, comps, grid, cfg, integrator)
            except Exception as exc:
                raise RuntimeError(
                    f"shot {i} (seed {(cfg.base_seed, i)}) failed: {exc}"
                ) from exc
            shot_curves[i] = weights[i] @ series

    return EnsembleResult(
        times=grid,
        mean=shot_curves.mean(axis=0),
        band_low=shot_curves.min(axis=0),
        band_high=shot_curves.max(axis=0),
        shots=cfg.shots,
        base_seed=cfg.base_seed,
        seeds=tuple(d.shot_seed for d in draws),
        n_bars=np.array([d.n_bar for d in draws]),
        rel_phases=np.array([d.rel_phase for d in draws]),
        process=process,
        model_label=label or "",
    )


def ensemble_csv(result: EnsembleResult) -> str:
    """Columns t_us, mean, band_low, band_high, shots, base_seed."""
    lines = [
        f"# model = {result.model_label}",
        f"# process = {result.process}",
        "t_us,mean,band_low,band_high,shots,base_seed",
    ]
    for i, t in enumerate(result.times):
        lines.append(
            f"{t * 1e6:.12g},{result.mean[i]:.12g},{result.band_low[i]:.12g},"
            f"{result.band_high[i]:.12g},{result.shots},{result.base_seed}"
        )
    return "\n".join(lines) + "\n"
