"""Complex Gamma and upper-incomplete-Gamma evaluation.

The closed-form transition probabilities need Gamma(1 +/- i nu) and
Gamma(1 +/- i nu, z) for complex z with Re z > 0 and oscillatory phases, a
region scipy does not cover for the incomplete function.  Three strategies
are provided and auto-selected: a Legendre-type continued fraction (modified
Lentz), the lower-incomplete power series, and an adaptive quadrature
fallback along the horizontal contour z + s, s in [0, inf).  Every result
carries the method used and an absolute error estimate; values never come
back silently low-precision.

References
----------
- Lanczos approximation with g = 7, n = 9 (coefficients as popularized by
  Numerical Recipes and Boost).
- W. H. Press et al., "Numerical Recipes", 3rd ed., ch. 6 (gser/gcf, the
  modified Lentz algorithm).
- DLMF 8.2, 8.9 for the incomplete-Gamma continued fraction and series.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = ["ComplexSpecialValue", "log_gamma", "upper_incomplete_gamma"]

LANCZOS_LOG_GAMMA = "lanczos-log-gamma"
CONTINUED_FRACTION = "continued-fraction"
SERIES = "series"
QUADRATURE_FALLBACK = "quadrature-fallback"

_EPS = 2.2e-16
_MAX_ITER = 512

# Lanczos g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ComplexSpecialValue:
    value: complex
    method: str
    est_error: float

    def __complex__(self) -> complex:
        return self.value


def _is_nonpositive_integer(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and z.real == round(z.real)


def _log_sin_pi(z: complex) -> complex:
    """log(sin(pi z)) without overflow for large |Im z|."""
    if z.imag < 0.0:
        return _log_sin_pi(z.conjugate()).conjugate()
    # sin(pi z) = e^{-i pi z} (e^{2 i pi z} - 1) / (2 i); |e^{2 i pi z}| <= 1 here
    w = cmath.exp(2j * cmath.pi * z)
    return -1j * cmath.pi * z + cmath.log1p(-w) + 1j * cmath.pi - cmath.log(2j)


def _log_gamma_value(z: complex) -> complex:
    if z.real < 0.5:
        # reflection: log Gamma(z) = log(pi / sin(pi z)) - log Gamma(1 - z)
        return math.log(math.pi) - _log_sin_pi(z) - _log_gamma_value(1.0 - z)
    zm1 = z - 1.0
    x = _LANCZOS_C[0]
    for i, c in enumerate(_LANCZOS_C[1:], start=1):
        x += c / (zm1 + i)
    t = zm1 + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (zm1 + 0.5) * cmath.log(t) - t + cmath.log(x)


def log_gamma(z) -> ComplexSpecialValue:
    """log Gamma(z) for complex z off the poles (Lanczos + reflection)."""
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise ValueError(f"log_gamma pole at z = {z}")
    v = _log_gamma_value(z)
    est = 5e-14 * (1.0 + abs(v))
    return ComplexSpecialValue(v, LANCZOS_LOG_GAMMA, est)


def _gamma(z: complex) -> complex:
    return cmath.exp(_log_gamma_value(z))


# ---------------------------------------------------------------------------
# upper incomplete Gamma
# ---------------------------------------------------------------------------

def _upper_cf(a: complex, z: complex):
    """Legendre continued fraction, good for |z| >~ |a| + 1 (modified Lentz)."""
    tiny = 1e-300
    b = z + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0 else 1.0 / tiny
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if d == 0:
            d = tiny
        c = b + an / c
        if c == 0:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 4.0 * _EPS:
            pref = cmath.exp(-z + a * cmath.log(z))
            v = pref * h
            return v, abs(v) * (abs(delta - 1.0) + 8.0 * _EPS) + 1e-300
    return None, None


def _upper_series(a: complex, z: complex):
    """Gamma(a) minus the lower series gamma(a,z) = z^a e^{-z} sum_n z^n/(a...(a+n))."""
    term = 1.0 / a
    total = term
    aa = a
    for _ in range(_MAX_ITER):
        aa += 1.0
        term *= z / aa
        total += term
        if abs(term) < abs(total) * 2.0 * _EPS:
            pref = cmath.exp(-z + a * cmath.log(z))
            lower = pref * total
            gam = _gamma(a)
            v = gam - lower
            # cancellation between Gamma(a) and the lower part dominates the error
            est = (abs(gam) + abs(lower)) * 8.0 * _EPS + abs(pref * term)
            return v, est
    return None, None


_QUAD_NODES, _QUAD_WEIGHTS = leggauss(16)
_QUAD_NODES_LO, _QUAD_WEIGHTS_LO = leggauss(8)


def _upper_quadrature(a: complex, z: complex):
    """Gamma(a, z) = e^{-z} int_0^inf (z + s)^{a-1} e^{-s} ds, panelwise.

    The contour runs horizontally from z, staying in Re t >= Re z > 0, so the
    principal power is analytic along it.  Panels span [0, S] with S chosen
    so the e^{-s} tail is negligible against the running total.
    """
    s_max = 45.0 + 2.0 * abs(a)
    edges = [0.0]
    w = 0.5
    while edges[-1] < s_max:
        edges.append(min(edges[-1] + w, s_max))
        w = min(2.0, w * 1.4)
    total = 0.0 + 0.0j
    est = 0.0
    am1 = a - 1.0
    for s0, s1 in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (s0 + s1), 0.5 * (s1 - s0)
        s_hi = mid + half * _QUAD_NODES
        s_lo = mid + half * _QUAD_NODES_LO
        f_hi = np.exp(am1 * np.log(z + s_hi) - s_hi)
        f_lo = np.exp(am1 * np.log(z + s_lo) - s_lo)
        v_hi = half * np.dot(_QUAD_WEIGHTS, f_hi)
        v_lo = half * np.dot(_QUAD_WEIGHTS_LO, f_lo)
        total += v_hi
        est += abs(v_hi - v_lo)
    tail = math.exp(-s_max) * abs(np.exp(am1 * np.log(z + s_max)))
    pref = cmath.exp(-z)
    v = pref * total
    return v, abs(pref) * (est + tail) + 1e-300


def upper_incomplete_gamma(a, z) -> ComplexSpecialValue:
    """Gamma(a, z) for complex a and z with Re z > 0 (or z = 0, Re a > 0).

    Strategy: continued fraction when |z| > |a| + 1, else the lower series
    against Gamma(a); a panel-quadrature fallback covers non-convergence or
    detected cancellation, and the returned object always carries the method
    actually used plus an absolute error estimate.
    """
    a = complex(a)
    z = complex(z)
    if z == 0:
        if a.real <= 0:
            raise ValueError("Gamma(a, 0) requires Re a > 0")
        lg = log_gamma(a)
        v = cmath.exp(lg.value)
        return ComplexSpecialValue(v, LANCZOS_LOG_GAMMA, abs(v) * 1e-13)
    if z.real <= 0:
        raise ValueError(f"upper_incomplete_gamma requires Re z > 0, got z = {z}")
    if _is_nonpositive_integer(a):
        # Gamma(a) is singular but Gamma(a, z) is finite; series path unusable
        v, est = _upper_cf(a, z)
        if v is None:
            v, est = _upper_quadrature(a, z)
            return ComplexSpecialValue(v, QUADRATURE_FALLBACK, est)
        return ComplexSpecialValue(v, CONTINUED_FRACTION, est)

    if abs(z) > abs(a) + 1.0:
        v, est = _upper_cf(a, z)
        if v is not None:
            return ComplexSpecialValue(v, CONTINUED_FRACTION, est)
        method = QUADRATURE_FALLBACK
        v, est = _upper_quadrature(a, z)
        return ComplexSpecialValue(v, method, est)

    v, est = _upper_series(a, z)
    if v is not None and est <= max(1e-10 * abs(v), 1e-280):
        return ComplexSpecialValue(v, SERIES, est)
    v, est = _upper_quadrature(a, z)
    return ComplexSpecialValue(v, QUADRATURE_FALLBACK, est)
