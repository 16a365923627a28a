"""Dense complex linear algebra on the truncated spin (x) Fock space.

Everything downstream (Hamiltonians, propagators, observables) is built on
the fixed basis ordering defined here:

    index = s*N + n,   s in {0 (|g>), 1 (|e>)},   n = 0 .. N-1 phonons,

so a ket is a length-2N complex vector whose first N entries are the |g,n>
amplitudes and whose last N entries are the |e,n> amplitudes.  The ordering
is part of the serialization contract: dumped operators/states are
bit-comparable across runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "HilbertSpec",
    "Operator",
    "QuantumState",
    "ladder_ops",
    "spin_ops",
    "number_op",
    "basis_ket",
    "thermal_probabilities",
    "thermal_state",
    "spin_populations",
    "expectation",
    "operator_dumps",
    "operator_loads",
    "state_dumps",
    "state_loads",
]

PURE = "pure-ket"
DENSITY = "density-matrix"

_SPIN_INDEX = {"g": 0, "e": 1, 0: 0, 1: 1}


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class HilbertSpec:
    """Truncated Hilbert space: two spin levels times Fock levels |0>..|N-1>."""

    fock_cutoff: int

    def __post_init__(self):
        if self.fock_cutoff < 1:
            raise ValueError(f"fock_cutoff must be >= 1, got {self.fock_cutoff}")

    @property
    def dim(self) -> int:
        return 2 * self.fock_cutoff

    def index(self, spin, n: int) -> int:
        """Flat basis index of |spin, n> (spin-major ordering)."""
        s = _SPIN_INDEX[spin]
        if not 0 <= n < self.fock_cutoff:
            raise ValueError(f"phonon number {n} outside truncation 0..{self.fock_cutoff - 1}")
        return s * self.fock_cutoff + n


@dataclass(frozen=True)
class Operator:
    """Dense operator on the full spin (x) Fock space."""

    spec: HilbertSpec
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries)
        if m.shape != (self.spec.dim, self.spec.dim):
            raise ValueError(f"operator shape {m.shape} does not match dim {self.spec.dim}")
        object.__setattr__(self, "entries", _readonly(m))

    def dagger(self) -> "Operator":
        return Operator(self.spec, self.entries.conj().T)

    def hermiticity_defect(self) -> float:
        """max |H - H^dag|, absolute."""
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def __add__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.spec, self.entries + other.entries)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.spec, self.entries - other.entries)

    def __mul__(self, c) -> "Operator":
        return Operator(self.spec, self.entries * c)

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.spec, self.entries @ other.entries)

    def _check(self, other: "Operator"):
        if other.spec != self.spec:
            raise ValueError("operators live on different Hilbert specs")


@dataclass(frozen=True)
class QuantumState:
    """Pure ket or density matrix, with norm/trace invariants checked on entry."""

    spec: HilbertSpec
    kind: str
    entries: np.ndarray
    label: str = field(default="", compare=False)

    def __post_init__(self):
        v = np.asarray(self.entries)
        d = self.spec.dim
        if self.kind == PURE:
            if v.shape != (d,):
                raise ValueError(f"pure state shape {v.shape}, expected ({d},)")
            nrm = float(np.linalg.norm(v))
            if abs(nrm - 1.0) > 1e-9:
                raise ValueError(f"ket norm {nrm} deviates from 1 beyond 1e-9")
        elif self.kind == DENSITY:
            if v.shape != (d, d):
                raise ValueError(f"density matrix shape {v.shape}, expected ({d},{d})")
            tr = complex(np.trace(v))
            if abs(tr - 1.0) > 1e-9:
                raise ValueError(f"trace {tr} deviates from 1 beyond 1e-9")
            if np.max(np.abs(v - v.conj().T)) > 1e-9:
                raise ValueError("density matrix is not Hermitian within 1e-9")
            w = np.linalg.eigvalsh(0.5 * (v + v.conj().T))
            if w.min() < -1e-10:
                raise ValueError(f"density matrix has eigenvalue {w.min()} < -1e-10")
        else:
            raise ValueError(f"unknown state kind {self.kind!r}")
        object.__setattr__(self, "entries", _readonly(v))

    @property
    def is_pure(self) -> bool:
        return self.kind == PURE

    def density(self) -> np.ndarray:
        """Density-matrix view of the state (outer product for kets)."""
        if self.is_pure:
            return np.outer(self.entries, self.entries.conj())
        return self.entries


# ---------------------------------------------------------------------------
# operator constructors
# ---------------------------------------------------------------------------

def _fock_ladder(n_levels: int) -> np.ndarray:
    b = np.zeros((n_levels, n_levels), dtype=np.complex128)
    for n in range(1, n_levels):
        b[n - 1, n] = np.sqrt(n)
    return b


def ladder_ops(spec: HilbertSpec) -> tuple[Operator, Operator]:
    """Annihilation/creation operators lifted to the full space.

    b|s,n> = sqrt(n)|s,n-1>; b_dagger is the conjugate transpose.  In the
    truncated space b_dagger|s,N-1> = 0, so the commutator [b, b_dagger]
    equals the identity except for the (N-1, N-1) Fock entry, which is 1-N.
    """
    bf = _fock_ladder(spec.fock_cutoff)
    b = np.kron(np.eye(2), bf)
    return Operator(spec, b), Operator(spec, b.conj().T)


def spin_ops(spec: HilbertSpec) -> tuple[Operator, Operator, Operator, Operator]:
    """(sigma_z, sigma_x, sigma_plus, sigma_minus) lifted to the full space.

    Conventions: sigma_z|g> = -|g>, sigma_z|e> = +|e>, sigma_plus|g> = |e>.
    """
    eye = np.eye(spec.fock_cutoff)
    sz = np.kron(np.diag([-1.0, 1.0]), eye)
    sp = np.kron(np.array([[0.0, 0.0], [1.0, 0.0]]), eye)
    sm = np.kron(np.array([[0.0, 1.0], [0.0, 0.0]]), eye)
    sx = sp + sm
    return (Operator(spec, sz), Operator(spec, sx), Operator(spec, sp), Operator(spec, sm))


def number_op(spec: HilbertSpec) -> Operator:
    """Phonon number operator b_dagger @ b on the full space."""
    n = np.kron(np.eye(2), np.diag(np.arange(spec.fock_cutoff, dtype=float)))
    return Operator(spec, n)


def basis_ket(spec: HilbertSpec, spin, n: int) -> QuantumState:
    """Basis state |spin, n>, spin in {'g','e'} (or 0/1)."""
    v = np.zeros(spec.dim, dtype=np.complex128)
    v[spec.index(spin, n)] = 1.0
    return QuantumState(spec, PURE, v, label=f"{'ge'[_SPIN_INDEX[spin]]}{n}")


# ---------------------------------------------------------------------------
# thermal states
# ---------------------------------------------------------------------------

# Above n_bar ~ N/4 the geometric tail cut by the truncation distorts both the
# renormalized weights and <n> at the percent level; reject rather than warn.
_THERMAL_TRUNCATION_FRACTION = 0.25


def thermal_probabilities(spec: HilbertSpec, n_bar: float) -> np.ndarray:
    """Renormalized geometric occupation weights p_n on the truncated ladder.

    p_n is proportional to n_bar^n / (1+n_bar)^(n+1) and the vector is
    renormalized to sum exactly to 1 over n = 0..N-1.
    """
    if n_bar < 0:
        raise ValueError(f"n_bar must be >= 0, got {n_bar}")
    n_max = spec.fock_cutoff
    if n_bar >= _THERMAL_TRUNCATION_FRACTION * n_max:
        raise ValueError(
            f"n_bar={n_bar} too large for cutoff N={n_max}"
            f" (require n_bar < N/4 so the truncated tail is negligible)"
        )
    if n_bar == 0.0:
        p = np.zeros(n_max)
        p[0] = 1.0
        return p
    q = n_bar / (1.0 + n_bar)
    p = (1.0 - q) * q ** np.arange(n_max)
    return p / p.sum()


def thermal_state(spec: HilbertSpec, n_bar: float, spin="g") -> QuantumState:
    """Thermal phonon density matrix tensored with a spin projector.

    The Fock factor is diagonal with :func:`thermal_probabilities` weights;
    the spin factor is |spin><spin| for the caller-chosen spin level.
    """
    p = thermal_probabilities(spec, n_bar)
    s = _SPIN_INDEX[spin]
    proj = np.zeros((2, 2))
    proj[s, s] = 1.0
    rho = np.kron(proj, np.diag(p)).astype(np.complex128)
    return QuantumState(spec, DENSITY, rho, label=f"{'ge'[s]},thermal({n_bar})")


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------

def spin_populations(state: QuantumState) -> tuple[float, float]:
    """(P_g, P_e) with the phonon register traced out."""
    n = state.spec.fock_cutoff
    if state.is_pure:
        pg = float(np.sum(np.abs(state.entries[:n]) ** 2))
        pe = float(np.sum(np.abs(state.entries[n:]) ** 2))
    else:
        d = np.real(np.diag(state.entries))
        pg = float(np.sum(d[:n]))
        pe = float(np.sum(d[n:]))
    return pg, pe


def expectation(op: Operator, state: QuantumState) -> complex:
    """<psi|A|psi> for kets, Tr(rho A) for density matrices."""
    if op.spec != state.spec:
        raise ValueError("operator and state live on different Hilbert specs")
    if state.is_pure:
        return complex(np.vdot(state.entries, op.entries @ state.entries))
    return complex(np.trace(state.entries @ op.entries))


# ---------------------------------------------------------------------------
# plain-text serialization ("re,im" pairs, row-major) for golden tests
# ---------------------------------------------------------------------------

def _dump_matrix(m: np.ndarray) -> str:
    rows = []
    for row in np.atleast_2d(m):
        rows.append(" ".join(f"{z.real!r},{z.imag!r}" for z in row))
    return "\n".join(rows) + "\n"


def _load_matrix(text: str) -> np.ndarray:
    rows = []
    for line in text.strip().splitlines():
        vals = []
        for tok in line.split():
            re_s, im_s = tok.split(",")
            vals.append(complex(float(re_s), float(im_s)))
        rows.append(vals)
    return np.array(rows, dtype=np.complex128)


def operator_dumps(op: Operator) -> str:
    return _dump_matrix(op.entries)


def operator_loads(spec: HilbertSpec, text: str) -> Operator:
    return Operator(spec, _load_matrix(text))


def state_dumps(state: QuantumState) -> str:
    return state.kind + "\n" + _dump_matrix(state.entries)


def state_loads(spec: HilbertSpec, text: str) -> QuantumState:
    kind, _, rest = text.partition("\n")
    m = _load_matrix(rest)
    if kind == PURE:
        m = m.ravel()
    return QuantumState(spec, kind, m)
