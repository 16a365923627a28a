"""Time-dependent Hamiltonians for the gap-chirped detector-field models.

All models are expressed on a shared term vocabulary

    H(t) = sum_k [ c_k(t) M_k + conj(c_k(t)) M_k^dag ],
    c_k(t) = A_k exp(-gamma_k t) exp(i (w_k t + mu_k ln(alpha t + C))) / (alpha t + C)^p_k,

with constant matrices M_k.  Hermiticity is then exact by construction, and
propagators can evaluate coefficients cheaply without rebuilding operators.

The effective lab-frame model is

    H(t) = [omega_q / (2 (alpha t + C))] sigma_z + omega_p b'b
           + g0 chi(t) sigma_x (b + b'),

with chi either 1 or exp(-t/T_d).  The trapped-ion builder produces the same
model from two chirped sideband tones in the rotating frame, retaining the
carrier and off-resonant sideband terms that a rotating-wave approximation
would drop, so the approximation can be tested numerically.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.constants import hbar, k as k_B

from .core import HilbertSpec, Operator, ladder_ops, number_op, spin_ops

__all__ = [
    "ModelParams",
    "IonParams",
    "TimeDependentHamiltonian",
    "switching_chi",
    "build_h_exp",
    "build_variant",
    "interaction_v",
    "laser_phase",
    "laser_mean_frequency",
    "build_ion_rotframe",
    "constant_hamiltonian",
    "DEFAULT_OMEGA_Z",
]

SWITCHING_KINDS = ("constant", "exponential")

# axial trap frequency of the reference experiment, rad/s
DEFAULT_OMEGA_Z = 2 * np.pi * 1.096e6

# warn when omega_q/omega_z or omega_p/omega_z exceeds this (rotating-wave margin)
RWA_RATIO_WARN = 0.25


def _normalize_switching(kind: str) -> str:
    k = kind.lower().replace("-damped", "")
    if k not in SWITCHING_KINDS:
        raise ValueError(f"switching must be one of {SWITCHING_KINDS}, got {kind!r}")
    return k


@dataclass(frozen=True)
class ModelParams:
    """Physics knobs of the detector-field model.

    Parameters
    ----------
    alpha : float
        Effective acceleration in 1/s (>= 0; 0 only meaningful for the
        fixed-gap comparison model).
    omega_q, omega_p, g0 : float
        Detector gap, field mode, and coupling angular frequencies (rad/s).
    C : float
        Dimensionless time-translation constant; the t=0 spin splitting is
        omega_q / C.  C = 0 is allowed for closed-form/quadrature paths only.
    T_d : float
        Damping time of the exponential switching (s).
    switching : str
        'constant' or 'exponential'.
    """

    alpha: float
    omega_q: float
    omega_p: float
    g0: float
    C: float = 1.0
    T_d: float = 2e-4
    switching: str = "exponential"

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.omega_q <= 0 or self.omega_p <= 0:
            raise ValueError("omega_q and omega_p must be > 0")
        if self.g0 < 0:
            raise ValueError("g0 must be >= 0")
        if self.C < 0:
            raise ValueError("C must be >= 0")
        if self.T_d <= 0:
            raise ValueError("T_d must be > 0")
        object.__setattr__(self, "switching", _normalize_switching(self.switching))

    @classmethod
    def from_khz(cls, nu_q_khz: float = 200.0, nu_p_khz: float = 25.0,
                 g0_khz: float = 5.0, alpha: float = 1e7, C: float = 1.0,
                 T_d_ms: float = 0.2, switching: str = "exponential") -> "ModelParams":
        """Build from nu = omega/2pi frequencies in kHz and T_d in ms."""
        two_pi = 2 * np.pi
        return cls(alpha=alpha, omega_q=two_pi * nu_q_khz * 1e3,
                   omega_p=two_pi * nu_p_khz * 1e3, g0=two_pi * g0_khz * 1e3,
                   C=C, T_d=T_d_ms * 1e-3, switching=switching)

    @property
    def beta(self) -> float:
        """Dimensionless temperature alpha / (2 pi omega_q)."""
        return self.alpha / (2 * np.pi * self.omega_q)

    @property
    def t_unruh(self) -> float:
        """Temperature hbar*alpha / (2 pi k_B) in kelvin."""
        return hbar * self.alpha / (2 * np.pi * k_B)

    @property
    def switch_rate(self) -> float:
        """Decay rate of the coupling envelope: 1/T_d or 0."""
        return 1.0 / self.T_d if self.switching == "exponential" else 0.0


def switching_chi(params: ModelParams, t):
    """Coupling envelope chi(t) in [0, 1]; t may be scalar or array, t >= 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("switching function is defined for t >= 0 only")
    if params.switching == "constant":
        return np.ones_like(t) if t.ndim else 1.0
    out = np.exp(-t / params.T_d)
    return out if t.ndim else float(out)


@dataclass(frozen=True)
class IonParams:
    """Trap and drive parameters implementing the model on a single ion.

    The sideband coupling strength must satisfy g0 = lamb_dicke * rabi_omega0 / 2.
    """

    model: ModelParams
    omega_z: float = DEFAULT_OMEGA_Z
    lamb_dicke: float = 0.1
    rabi_omega0: float = 2 * np.pi * 100e3
    phases: tuple = (0.0, 0.0)

    def __post_init__(self):
        g0 = self.model.g0
        implied = self.lamb_dicke * self.rabi_omega0 / 2.0
        if abs(implied - g0) > 1e-12 * max(g0, 1.0):
            raise ValueError(
                f"inconsistent drive: lamb_dicke*rabi_omega0/2 = {implied} but g0 = {g0}"
            )
        for name, w in (("omega_q", self.model.omega_q), ("omega_p", self.model.omega_p)):
            ratio = w / self.omega_z
            if ratio > RWA_RATIO_WARN:
                warnings.warn(
                    f"rotating-wave margin: {name}/omega_z = {ratio:.3f} > {RWA_RATIO_WARN}",
                    stacklevel=2,
                )

    @classmethod
    def from_model(cls, model: ModelParams, lamb_dicke: float = 0.1,
                   omega_z: float = DEFAULT_OMEGA_Z, phases=(0.0, 0.0)) -> "IonParams":
        """Choose the carrier Rabi frequency to honor g0 = eta*Omega0/2."""
        return cls(model=model, omega_z=omega_z, lamb_dicke=lamb_dicke,
                   rabi_omega0=2.0 * model.g0 / lamb_dicke, phases=tuple(phases))

    @property
    def sideband_detuning(self) -> float:
        """omega_z - omega_p, the tone offset from the (chirped) carrier."""
        return self.omega_z - self.model.omega_p


# ---------------------------------------------------------------------------
# term engine
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimeDependentHamiltonian:
    """Evaluable map t -> Operator, stored as coefficient/matrix terms.

    Each term contributes c_k(t) M_k + conj(c_k(t)) M_k^dag with

        c_k(t) = amp_k * exp(-gamma_k t) * exp(i(freq_k t + mu_k ln(alpha t + C)))
                 / (alpha t + C)^pow_k .

    Hermitian pieces A(t) M (M Hermitian, A real) are stored as amp = A/2 on M.
    """

    spec: HilbertSpec
    label: str
    alpha: float
    C: float
    amps: np.ndarray        # complex (K,)
    gammas: np.ndarray      # float (K,)
    freqs: np.ndarray       # float (K,)
    mus: np.ndarray         # float (K,)
    pows: np.ndarray        # int (K,)
    mats: np.ndarray        # complex (K, d, d)
    forced_max_step: float | None = None
    mats_dag: np.ndarray = field(init=False, repr=False)
    _needs_chirp: bool = field(init=False, repr=False)

    def __post_init__(self):
        md = np.conj(np.transpose(self.mats, (0, 2, 1))).copy()
        object.__setattr__(self, "mats_dag", md)
        needs = bool(np.any(self.pows != 0) or np.any(self.mus != 0.0))
        object.__setattr__(self, "_needs_chirp", needs)

    @classmethod
    def from_terms(cls, spec: HilbertSpec, terms, label: str,
                   alpha: float = 0.0, C: float = 1.0,
                   forced_max_step: float | None = None) -> "TimeDependentHamiltonian":
        """terms: iterable of (matrix, amp, gamma, freq, mu, pow)."""
        amps, gammas, freqs, mus, pows, mats = [], [], [], [], [], []
        for m, amp, gamma, freq, mu, p in terms:
            m = m.entries if isinstance(m, Operator) else np.asarray(m, dtype=np.complex128)
            mats.append(m)
            amps.append(amp)
            gammas.append(gamma)
            freqs.append(freq)
            mus.append(mu)
            pows.append(p)
        k = len(mats)
        d = spec.dim
        return cls(
            spec=spec, label=label, alpha=float(alpha), C=float(C),
            amps=np.asarray(amps, dtype=np.complex128).reshape(k),
            gammas=np.asarray(gammas, dtype=float).reshape(k),
            freqs=np.asarray(freqs, dtype=float).reshape(k),
            mus=np.asarray(mus, dtype=float).reshape(k),
            pows=np.asarray(pows, dtype=np.int64).reshape(k),
            mats=np.asarray(mats, dtype=np.complex128).reshape(k, d, d),
            forced_max_step=forced_max_step,
        )

    def _chirp_arg(self, t: float) -> float:
        u = self.alpha * t + self.C
        if self._needs_chirp and u <= 0.0:
            raise ValueError(
                f"{self.label}: alpha*t + C = {u} <= 0 at t = {t}; model undefined there"
            )
        return u

    def coefficients(self, t: float) -> np.ndarray:
        """Complex coefficient vector c_k(t)."""
        u = self._chirp_arg(float(t))
        phase = self.freqs * t
        if self._needs_chirp:
            lu = np.log(u)
            phase = phase + self.mus * lu
            scale = u ** (-self.pows.astype(float))
        else:
            scale = 1.0
        return self.amps * np.exp(-self.gammas * t + 1j * phase) * scale

    def evaluate(self, t: float) -> Operator:
        """Dense Hermitian operator H(t)."""
        c = self.coefficients(t)
        h = np.tensordot(c, self.mats, axes=1) + np.tensordot(np.conj(c), self.mats_dag, axes=1)
        return Operator(self.spec, h)


def constant_hamiltonian(spec: HilbertSpec, op: Operator, label: str = "constant",
                         hermitian: bool = True) -> TimeDependentHamiltonian:
    """Wrap a fixed matrix M as H(t) = M + M^dag (or (M+M^dag)/2 if hermitian)."""
    amp = 0.5 if hermitian else 1.0
    return TimeDependentHamiltonian.from_terms(spec, [(op, amp, 0.0, 0.0, 0.0, 0)], label)


# ---------------------------------------------------------------------------
# model builders
# ---------------------------------------------------------------------------

def _coupling_matrix(spec: HilbertSpec) -> np.ndarray:
    b, bd = ladder_ops(spec)
    _, sx, _, _ = spin_ops(spec)
    return (sx @ (b + bd)).entries


def build_h_exp(params: ModelParams, spec: HilbertSpec) -> TimeDependentHamiltonian:
    """Effective lab-frame model with gap scaling 1/(alpha t + C).

    Requires C > 0 (the C = 0 model diverges at t = 0 and is served by the
    closed-form and quadrature paths instead).
    """
    if params.C <= 0:
        raise ValueError("build_h_exp requires C > 0 (gap diverges at t = 0 otherwise)")
    sz = spin_ops(spec)[0].entries
    n = number_op(spec).entries
    terms = [
        (sz, 0.25 * params.omega_q, 0.0, 0.0, 0.0, 1),
        (n, 0.5 * params.omega_p, 0.0, 0.0, 0.0, 0),
        (_coupling_matrix(spec), 0.5 * params.g0, params.switch_rate, 0.0, 0.0, 0),
    ]
    label = f"ue(C={params.C:g},{params.switching})"
    return TimeDependentHamiltonian.from_terms(spec, terms, label,
                                               alpha=params.alpha, C=params.C)


VARIANTS = ("rabi", "ue01", "ue1exp")


def build_variant(kind: str, params: ModelParams, spec: HilbertSpec) -> TimeDependentHamiltonian:
    """Comparison models: fixed-gap 'rabi', constant-coupling 'ue01' with a
    1/(alpha t) gap (undefined at t = 0), and the damped 'ue1exp' model."""
    if kind == "rabi":
        sz = spin_ops(spec)[0].entries
        n = number_op(spec).entries
        terms = [
            (sz, 0.25 * params.omega_q, 0.0, 0.0, 0.0, 0),
            (n, 0.5 * params.omega_p, 0.0, 0.0, 0.0, 0),
            (_coupling_matrix(spec), 0.5 * params.g0, 0.0, 0.0, 0.0, 0),
        ]
        return TimeDependentHamiltonian.from_terms(spec, terms, "rabi")
    if kind == "ue01":
        if params.alpha <= 0:
            raise ValueError("ue01 requires alpha > 0")
        sz = spin_ops(spec)[0].entries
        n = number_op(spec).entries
        terms = [
            (sz, 0.25 * params.omega_q, 0.0, 0.0, 0.0, 1),
            (n, 0.5 * params.omega_p, 0.0, 0.0, 0.0, 0),
            (_coupling_matrix(spec), 0.5 * params.g0, 0.0, 0.0, 0.0, 0),
        ]
        return TimeDependentHamiltonian.from_terms(spec, terms, "ue01",
                                                   alpha=params.alpha, C=0.0)
    if kind == "ue1exp":
        return build_h_exp(replace(params, C=1.0, switching="exponential"), spec)
    raise ValueError(f"unknown variant {kind!r}, expected one of {VARIANTS}")


def interaction_v(params: ModelParams, spec: HilbertSpec) -> TimeDependentHamiltonian:
    """Interaction-picture coupling V(t) for the 1/(alpha t + C) gap model.

    V(t) = g0 chi(t) (b' e^{i omega_p t} + b e^{-i omega_p t})
                    (sigma_+ e^{i omega_q ln(alpha t + C)/alpha} + h.c. part),

    i.e. the frame rotated by
    U(t) = exp(-i (omega_q/2alpha) ln(alpha t + C) sigma_z) exp(-i omega_p t b'b).
    The matrix element <e,1|V|g,0> equals g0 chi(t) e^{i omega_p t}
    e^{i omega_q ln(alpha t + C)/alpha}.
    """
    if params.alpha <= 0:
        raise ValueError("interaction picture requires alpha > 0")
    b, bd = ladder_ops(spec)
    sp = spin_ops(spec)[2]
    mu = params.omega_q / params.alpha
    g = params.g0
    rate = params.switch_rate
    terms = [
        ((sp @ bd).entries, g, rate, params.omega_p, mu, 0),
        ((sp @ b).entries, g, rate, -params.omega_p, mu, 0),
    ]
    label = f"interaction(C={params.C:g},{params.switching})"
    return TimeDependentHamiltonian.from_terms(spec, terms, label,
                                               alpha=params.alpha, C=params.C)


def rotation_to_interaction(params: ModelParams, spec: HilbertSpec, t: float) -> np.ndarray:
    """Unitary U(t) with psi_interaction = U(t)^dag psi_schrodinger."""
    u = params.alpha * t + params.C
    if u <= 0:
        raise ValueError("alpha*t + C must be positive")
    phi = 0.5 * (params.omega_q / params.alpha) * np.log(u)
    n_f = np.arange(spec.fock_cutoff)
    spin_phase = np.exp(-1j * phi * np.array([-1.0, 1.0]))
    fock_phase = np.exp(-1j * params.omega_p * t * n_f)
    return np.diag(np.kron(spin_phase, fock_phase))


# ---------------------------------------------------------------------------
# trapped-ion rotating frame
# ---------------------------------------------------------------------------

def laser_phase(ion: IonParams, tone: str, t: float) -> float:
    """Accumulated drive phase Phi(t) with the optical carrier removed.

    Phi(t) = -(omega_q/alpha) ln((alpha t + C)/C) +/- (omega_z - omega_p) t,
    '+' for the 'blue' tone, '-' for 'red'.  The instantaneous frequency is
    dPhi/dt = -omega_q/(alpha t + C) +/- (omega_z - omega_p) plus the symbolic
    carrier; the chirp is defined by this exact phase, not by a stepwise
    frequency.
    """
    m = ion.model
    if t < 0:
        raise ValueError("t must be >= 0")
    if m.C <= 0 or m.alpha < 0:
        raise ValueError("laser chirp requires C > 0")
    sign = {"blue": +1.0, "red": -1.0}[tone]
    chirp = -(m.omega_q / m.alpha) * np.log((m.alpha * t + m.C) / m.C) if m.alpha > 0 \
        else -(m.omega_q / m.C) * t
    return float(chirp + sign * ion.sideband_detuning * t)


def laser_mean_frequency(ion: IonParams, tone: str, t: float) -> float:
    """Phi(t)/t, the mean angular frequency over [0, t] (carrier removed)."""
    if t <= 0:
        m = ion.model
        sign = {"blue": +1.0, "red": -1.0}[tone]
        return float(-m.omega_q / m.C + sign * ion.sideband_detuning)
    return laser_phase(ion, tone, t) / t


# resolve the fastest retained oscillation, 2*(omega_z - omega_p), with
# >= 100 steps per period at the reference trap parameters
ION_MAX_STEP = 5e-9

# first-order expansion in the Lamb-Dicke parameter breaks down beyond this
MAX_LAMB_DICKE = 0.2


def build_ion_rotframe(ion: IonParams, spec: HilbertSpec, lamb_dicke_order: int = 1,
                       include_fast_terms: bool = True) -> TimeDependentHamiltonian:
    """Two-tone chirped-drive ion Hamiltonian in the co-chirped rotating frame.

    The frame rotates with (omega_z - omega_p) b'b + (1/2)(omega_0 -
    omega_q/(alpha t + C)) sigma_z, and the laser exponentials are expanded to
    first order in the Lamb-Dicke parameter.  The returned model keeps the
    carrier and both sidebands of both tones with their full time-dependent
    phases; pass include_fast_terms=False to drop everything a rotating-wave
    approximation discards (leaving i g0 chi (sigma_+ b' + sigma_+ b) + h.c.,
    which is the effective model up to a fixed spin-phase rotation).
    """
    if lamb_dicke_order != 1:
        raise ValueError("only first-order Lamb-Dicke expansion is implemented")
    eta = ion.lamb_dicke
    if eta > MAX_LAMB_DICKE:
        raise ValueError(f"lamb_dicke = {eta} > {MAX_LAMB_DICKE}: expansion invalid")
    m = ion.model
    if m.C <= 0:
        raise ValueError("ion rotating frame requires C > 0")
    delta = ion.sideband_detuning
    om = ion.rabi_omega0
    rate = m.switch_rate
    p1, p2 = ion.phases
    e1, e2 = np.exp(1j * p1), np.exp(1j * p2)

    b, bd = ladder_ops(spec)
    sz, _, sp, _ = spin_ops(spec)
    n = number_op(spec).entries
    sp_bd = (sp @ bd).entries
    sp_b = (sp @ b).entries

    terms = [
        (sz.entries, 0.25 * m.omega_q, 0.0, 0.0, 0.0, 1),
        (n, 0.5 * m.omega_p, 0.0, 0.0, 0.0, 0),
        # resonant sidebands: tone 1 drives sigma_+ b', tone 2 drives sigma_+ b
        (sp_bd, 0.5j * eta * om * e1, rate, 0.0, 0.0, 0),
        (sp_b, 0.5j * eta * om * e2, rate, 0.0, 0.0, 0),
    ]
    if include_fast_terms:
        terms += [
            # carriers of both tones, detuned by -/+ delta
            (sp.entries, 0.5 * om * e1, rate, -delta, 0.0, 0),
            (sp.entries, 0.5 * om * e2, rate, +delta, 0.0, 0),
            # wrong-sideband terms at -/+ 2*delta
            (sp_b, 0.5j * eta * om * e1, rate, -2 * delta, 0.0, 0),
            (sp_bd, 0.5j * eta * om * e2, rate, +2 * delta, 0.0, 0),
        ]
    label = "ion-rotframe" + ("" if include_fast_terms else "-rwa")
    return TimeDependentHamiltonian.from_terms(
        spec, terms, label, alpha=m.alpha, C=m.C,
        forced_max_step=ION_MAX_STEP if include_fast_terms else None,
    )
