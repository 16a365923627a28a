"""Right-hand-side builders for the propagators.

A jitted kernel is used when numba is importable; otherwise a vectorized
numpy fallback with identical semantics (but not bit-identical rounding) is
returned.  The backend is fixed at import time so repeated runs in one
environment are deterministic.
"""

from __future__ import annotations

import numpy as np

try:  # pragma: no cover - exercised implicitly
    import numba

    HAVE_NUMBA = True
except Exception:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False


def _coeffs_numpy(t, amps, gammas, freqs, mus, pows, alpha, C):
    u = alpha * t + C
    phase = freqs * t + mus * (np.log(u) if u > 0 else np.nan)
    return amps * np.exp(-gammas * t + 1j * phase) * u ** (-pows.astype(float))


if HAVE_NUMBA:

    @numba.njit(cache=True, fastmath=False)
    def _rhs_kernel(t, y, amps, gammas, freqs, mus, pows, alpha, C, mats, mats_dag):
        k_terms = amps.shape[0]
        d = y.shape[0]
        m = y.shape[1]
        u = alpha * t + C
        lu = np.log(u) if u > 0.0 else 0.0
        c = np.empty(k_terms, np.complex128)
        for k in range(k_terms):
            ph = freqs[k] * t + mus[k] * lu
            env = np.exp(-gammas[k] * t)
            if pows[k] != 0:
                env = env / u ** pows[k]
            c[k] = amps[k] * env * (np.cos(ph) + 1j * np.sin(ph))
        out = np.zeros((d, m), np.complex128)
        for i in range(d):
            for j in range(d):
                h = 0.0 + 0.0j
                for k in range(k_terms):
                    h += c[k] * mats[k, i, j] + np.conj(c[k]) * mats_dag[k, i, j]
                if h != 0.0:
                    for col in range(m):
                        out[i, col] += h * y[j, col]
        return -1j * out


def make_schrodinger_rhs(ham):
    """f(t, y_flat) = -i H(t) y for flattened (dim, m) column blocks."""
    d = ham.spec.dim
    amps, gammas, freqs = ham.amps, ham.gammas, ham.freqs
    mus, pows = ham.mus, ham.pows
    alpha, C = ham.alpha, ham.C
    mats, mats_dag = ham.mats, ham.mats_dag

    if HAVE_NUMBA:

        def rhs(t, y):
            y2 = np.ascontiguousarray(y).reshape(d, -1)
            return _rhs_kernel(t, y2, amps, gammas, freqs, mus, pows,
                               alpha, C, mats, mats_dag).ravel()

        return rhs

    def rhs(t, y):
        c = _coeffs_numpy(t, amps, gammas, freqs, mus, pows, alpha, C)
        h = np.tensordot(c, mats, axes=1)
        h += np.tensordot(np.conj(c), mats_dag, axes=1)
        return (-1j) * (h @ y.reshape(d, -1)).ravel()

    return rhs


def make_lindblad_rhs(ham, collapse_ops, rates):
    """f(t, rho_flat) for the master equation with fixed collapse operators."""
    d = ham.spec.dim
    amps, gammas, freqs = ham.amps, ham.gammas, ham.freqs
    mus, pows = ham.mus, ham.pows
    alpha, C = ham.alpha, ham.C
    mats, mats_dag = ham.mats, ham.mats_dag
    ls = [np.asarray(op, dtype=np.complex128) for op in collapse_ops]
    lds = [l.conj().T for l in ls]
    ldl = [ld @ l for l, ld in zip(ls, lds)]
    rates = [float(r) for r in rates]

    def rhs(t, y):
        rho = y.reshape(d, d)
        c = _coeffs_numpy(t, amps, gammas, freqs, mus, pows, alpha, C)
        h = np.tensordot(c, mats, axes=1)
        h += np.tensordot(np.conj(c), mats_dag, axes=1)
        out = -1j * (h @ rho - rho @ h)
        for r, l, ld, m in zip(rates, ls, lds, ldl):
            if r:
                out += r * (l @ rho @ ld - 0.5 * (m @ rho + rho @ m))
        return out.ravel()

    return rhs
