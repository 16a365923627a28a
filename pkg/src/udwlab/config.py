"""Run configuration: INI ingestion/emission, unit handling, validation.

Frequencies enter as nu = omega/2pi in kHz, times in ms (steps in us/ns where
noted), and everything is converted to rad/s and seconds internally.  The
emitted text round-trips losslessly through the parser.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .analytic import p_final_ideal
from .core import HilbertSpec
from .ensemble import NoiseConfig
from .evolution import IntegratorConfig, LindbladTerms
from .hamiltonians import (DEFAULT_OMEGA_Z, IonParams, ModelParams,
                           build_h_exp, build_ion_rotframe, build_variant)

__all__ = [
    "RunConfig",
    "SweepSpec",
    "Finding",
    "default_config",
    "parse_config",
    "emit_config",
    "validate_params",
    "emission_zone_boundary",
    "MODEL_KINDS",
]

MODEL_KINDS = ("effective", "rabi", "ue01", "ue1exp", "ion")

TWO_PI_KHZ = 2.0 * math.pi * 1e3


def khz_to_rad(nu_khz: float) -> float:
    return TWO_PI_KHZ * nu_khz


def rad_to_khz(omega: float) -> float:
    return omega / TWO_PI_KHZ


@dataclass(frozen=True)
class RunConfig:
    model_kind: str = "effective"
    params: ModelParams = field(default_factory=ModelParams.from_khz)
    fock_cutoff: int = 12
    # ion-frame extras
    nu_z_khz: float = DEFAULT_OMEGA_Z / TWO_PI_KHZ
    lamb_dicke: float = 0.1
    phases: tuple = (0.0, 0.0)
    # run window
    process: str = "excitation"
    t_start: float = 0.0
    t_end: float = 1e-3
    dt: float = 1e-6
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    outdir: str = "udwlab-out"

    def __post_init__(self):
        if self.model_kind not in MODEL_KINDS:
            raise ValueError(f"model kind must be one of {MODEL_KINDS}")
        if self.process not in ("excitation", "emission"):
            raise ValueError("process must be 'excitation' or 'emission'")
        if self.fock_cutoff < 1:
            raise ValueError("fock_cutoff must be >= 1")
        if not (0 <= self.t_start < self.t_end):
            raise ValueError("need 0 <= t_start < t_end")
        if self.dt <= 0 or self.dt > self.t_end - self.t_start:
            raise ValueError("need 0 < dt <= t_end - t_start")

    @property
    def spec(self) -> HilbertSpec:
        return HilbertSpec(self.fock_cutoff)

    def grid(self) -> np.ndarray:
        n = int(round((self.t_end - self.t_start) / self.dt))
        return self.t_start + np.linspace(0.0, n * self.dt, n + 1)

    def ion_params(self) -> IonParams:
        return IonParams.from_model(self.params, lamb_dicke=self.lamb_dicke,
                                    omega_z=khz_to_rad(self.nu_z_khz),
                                    phases=self.phases)

    def hamiltonian(self, spec: HilbertSpec | None = None, rel_phase: float = 0.0):
        """Build the configured model; rel_phase shifts the second ion tone."""
        spec = spec or self.spec
        if self.model_kind == "effective":
            return build_h_exp(self.params, spec)
        if self.model_kind == "ion":
            ion = self.ion_params()
            if rel_phase:
                ion = replace(ion, phases=(ion.phases[0], ion.phases[1] + rel_phase))
            return build_ion_rotframe(ion, spec)
        return build_variant(self.model_kind, self.params, spec)


# ---------------------------------------------------------------------------
# INI round-trip
# ---------------------------------------------------------------------------

def default_config() -> RunConfig:
    return RunConfig()


def emit_config(cfg: RunConfig) -> str:
    """Serialize to the key = value grammar; parse_config inverts losslessly."""
    p = cfg.params
    cp = configparser.ConfigParser()
    cp["model"] = {
        "kind": cfg.model_kind,
        "nu_q_khz": repr(rad_to_khz(p.omega_q)),
        "nu_p_khz": repr(rad_to_khz(p.omega_p)),
        "g0_khz": repr(rad_to_khz(p.g0)),
        "alpha_per_s": repr(p.alpha),
        "time_translation_c": repr(p.C),
        "t_d_ms": repr(p.T_d * 1e3),
        "switching": p.switching,
        "fock_cutoff": str(cfg.fock_cutoff),
    }
    cp["ion"] = {
        "nu_z_khz": repr(cfg.nu_z_khz),
        "lamb_dicke": repr(cfg.lamb_dicke),
        "phase1_rad": repr(cfg.phases[0]),
        "phase2_rad": repr(cfg.phases[1]),
    }
    cp["run"] = {
        "process": cfg.process,
        "t_start_ms": repr(cfg.t_start * 1e3),
        "t_end_ms": repr(cfg.t_end * 1e3),
        "dt_us": repr(cfg.dt * 1e6),
    }
    integ = {
        "method": cfg.integrator.method,
        "rel_tol": repr(cfg.integrator.rel_tol),
        "abs_tol": repr(cfg.integrator.abs_tol),
    }
    if cfg.integrator.max_step is not None:
        integ["max_step_us"] = repr(cfg.integrator.max_step * 1e6)
    if cfg.integrator.fixed_step is not None:
        integ["fixed_step_ns"] = repr(cfg.integrator.fixed_step * 1e9)
    cp["integrator"] = integ
    n = cfg.noise
    rates = dict(n.lindblad.roles)
    cp["noise"] = {
        "n_bar_low": repr(n.n_bar_range[0]),
        "n_bar_high": repr(n.n_bar_range[1]),
        "phase_jitter": n.phase_jitter,
        "fixed_phase_rad": repr(n.fixed_phase),
        "shots": str(n.shots),
        "base_seed": str(n.base_seed),
        "dephasing_rate_per_s": repr(rates.get("dephasing", 0.0)),
        "decay_rate_per_s": repr(rates.get("decay", 0.0)),
        "heating_rate_per_s": repr(rates.get("heating", 0.0)),
        "damping_rate_per_s": repr(rates.get("damping", 0.0)),
    }
    cp["output"] = {"outdir": cfg.outdir}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser()
    cp.read_string(text)

    def fget(section, key, fallback):
        return cp.getfloat(section, key, fallback=fallback)

    m = cp["model"] if cp.has_section("model") else {}
    params = ModelParams.from_khz(
        nu_q_khz=fget("model", "nu_q_khz", 200.0),
        nu_p_khz=fget("model", "nu_p_khz", 25.0),
        g0_khz=fget("model", "g0_khz", 5.0),
        alpha=fget("model", "alpha_per_s", 1e7),
        C=fget("model", "time_translation_c", 1.0),
        T_d_ms=fget("model", "t_d_ms", 0.2),
        switching=m.get("switching", "exponential"),
    )
    kind = m.get("kind", "effective")
    fock = cp.getint("model", "fock_cutoff", fallback=12)

    integ_kwargs = {}
    if cp.has_section("integrator"):
        s = cp["integrator"]
        integ_kwargs["method"] = s.get("method", IntegratorConfig().method)
        integ_kwargs["rel_tol"] = fget("integrator", "rel_tol", 1e-9)
        integ_kwargs["abs_tol"] = fget("integrator", "abs_tol", 1e-11)
        if s.get("max_step_us"):
            integ_kwargs["max_step"] = fget("integrator", "max_step_us", None) * 1e-6
        if s.get("fixed_step_ns"):
            integ_kwargs["fixed_step"] = fget("integrator", "fixed_step_ns", None) * 1e-9
    integrator = IntegratorConfig(**integ_kwargs)

    spec_for_rates = HilbertSpec(fock)
    lind = LindbladTerms.from_rates(
        spec_for_rates,
        dephasing=fget("noise", "dephasing_rate_per_s", 0.0),
        decay=fget("noise", "decay_rate_per_s", 0.0),
        heating=fget("noise", "heating_rate_per_s", 0.0),
        damping=fget("noise", "damping_rate_per_s", 0.0),
    )
    nsec = cp["noise"] if cp.has_section("noise") else {}
    noise = NoiseConfig(
        n_bar_range=(fget("noise", "n_bar_low", 0.02), fget("noise", "n_bar_high", 0.07)),
        phase_jitter=nsec.get("phase_jitter", "uniform-on-circle"),
        fixed_phase=fget("noise", "fixed_phase_rad", 0.0),
        lindblad=lind,
        shots=cp.getint("noise", "shots", fallback=200),
        base_seed=cp.getint("noise", "base_seed", fallback=20260810),
    )
    rsec = cp["run"] if cp.has_section("run") else {}
    return RunConfig(
        model_kind=kind,
        params=params,
        fock_cutoff=fock,
        nu_z_khz=fget("ion", "nu_z_khz", DEFAULT_OMEGA_Z / TWO_PI_KHZ),
        lamb_dicke=fget("ion", "lamb_dicke", 0.1),
        phases=(fget("ion", "phase1_rad", 0.0), fget("ion", "phase2_rad", 0.0)),
        process=rsec.get("process", "excitation"),
        t_start=fget("run", "t_start_ms", 0.0) * 1e-3,
        t_end=fget("run", "t_end_ms", 1.0) * 1e-3,
        dt=fget("run", "dt_us", 1.0) * 1e-6,
        integrator=integrator,
        noise=noise,
        outdir=cp.get("output", "outdir", fallback="udwlab-out"),
    )


# ---------------------------------------------------------------------------
# parameter validation against the experiment's constraint set
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Finding:
    name: str
    level: str  # 'ok' | 'warning' | 'error'
    message: str
    margin: float | None = None


# measurability window for the predicted final transition probability
P_FINAL_WINDOW = (0.02, 0.1)
RWA_RATIO_LIMIT = 0.25
OBSERVABILITY_RATIO = 4.0
SWITCHING_PRODUCT_MIN = 10.0
STEADY_STATE_FACTOR = 4.0
BETA_RANGE = (0.1, 100.0)


def validate_params(cfg: RunConfig) -> list[Finding]:
    """Evaluate every constraint of the reference parameter set.

    Returns one finding per constraint with the margin; hard errors are only
    produced for physically invalid values (those normally fail at parse
    time already).
    """
    p = cfg.params
    out = []

    ratio = p.omega_q / p.omega_p
    out.append(Finding(
        "observability", "ok" if ratio >= OBSERVABILITY_RATIO else "warning",
        f"omega_q/omega_p = {ratio:.3g} (want >= {OBSERVABILITY_RATIO:g})", ratio))

    omega_z = khz_to_rad(cfg.nu_z_khz)
    for nm, w in (("rwa-spin", p.omega_q), ("rwa-field", p.omega_p)):
        r = w / omega_z
        out.append(Finding(
            nm, "ok" if r <= RWA_RATIO_LIMIT else "warning",
            f"{nm.split('-')[1]} frequency / trap frequency = {r:.3f} "
            f"(want <= {RWA_RATIO_LIMIT})", r))

    if p.alpha > 0:
        lo, hi = P_FINAL_WINDOW
        for process in ("excitation", "emission"):
            pf = p_final_ideal(p, process).p_final
            if pf > hi:
                lvl, note = "warning", f"exceeds first-order validity bound {hi}"
            elif pf < lo:
                lvl, note = "warning", f"below measurability floor {lo}"
            else:
                lvl, note = "ok", f"inside window [{lo}, {hi}]"
            out.append(Finding(f"p-final-{process}", lvl,
                               f"predicted p_final = {pf:.4g}: {note}", pf))
        b = p.beta
        out.append(Finding(
            "beta-range", "ok" if BETA_RANGE[0] <= b <= BETA_RANGE[1] else "warning",
            f"beta = {b:.4g} (scan design range {BETA_RANGE})", b))
    else:
        out.append(Finding("beta-range", "warning", "alpha = 0: no thermal response", 0.0))

    wptd = p.omega_p * p.T_d
    out.append(Finding(
        "switching-product", "ok" if wptd >= SWITCHING_PRODUCT_MIN else "warning",
        f"omega_p * T_d = {wptd:.3g} (want >> 1, threshold {SWITCHING_PRODUCT_MIN})", wptd))

    tmax_ratio = cfg.t_end / p.T_d
    out.append(Finding(
        "steady-state-window", "ok" if tmax_ratio >= STEADY_STATE_FACTOR else "warning",
        f"t_end/T_d = {tmax_ratio:.3g} (want >= {STEADY_STATE_FACTOR:g} to reach steady state)",
        tmax_ratio))
    return out


# ---------------------------------------------------------------------------
# acceleration sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    """Log-spaced acceleration grid with the emission zone rule.

    Emission runs use nu_p_low_khz below the zone crossover (where the
    25 kHz first-order probability would exceed the validity bound) and
    nu_p_high_khz above it.
    """

    alphas: tuple = ()
    nu_p_low_khz: float = 50.0
    nu_p_high_khz: float = 25.0
    processes: tuple = ("excitation", "emission")

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=float)
        if a.size == 0:
            raise ValueError("alpha grid is empty")
        if np.any(np.diff(a) <= 0):
            raise ValueError("alpha grid must be strictly increasing")

    @classmethod
    def default(cls, n_points: int = 25, alpha_min: float = 1e6,
                alpha_max: float = 1e9, **kw) -> "SweepSpec":
        alphas = tuple(np.logspace(math.log10(alpha_min), math.log10(alpha_max), n_points))
        return cls(alphas=alphas, **kw)

    def emission_nu_p_khz(self, alpha: float, boundary: float) -> float:
        return self.nu_p_low_khz if alpha < boundary else self.nu_p_high_khz


def emission_zone_boundary(base: ModelParams, nu_p_khz: float = 25.0,
                           threshold: float = P_FINAL_WINDOW[1]) -> float:
    """Smallest alpha where the ideal emission p_final at nu_p_khz drops
    below the validity threshold (bisection on log alpha)."""
    wp = khz_to_rad(nu_p_khz)

    def pf(alpha: float) -> float:
        return p_final_ideal(replace(base, alpha=alpha, omega_p=wp), "emission").p_final

    lo, hi = 1e3, 1e12
    if pf(lo) < threshold:
        return lo
    if pf(hi) > threshold:
        raise ValueError("emission p_final never drops below threshold on the search range")
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if pf(mid) >= threshold:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1.0 + 1e-12:
            break
    return hi
