"""First-order closed-form transition probabilities and thermometry.

Three families of final transition probabilities for the exponentially
switched, gap-chirped detector:

- ``ideal``: the omega_p*T_d >> 1 limit; the Planck-factor forms
  p_exc = (g0^2/omega_p^2) (1/beta)/(e^{1/beta} - 1) and
  p_emi = (g0^2/omega_p^2) (1/beta)/(1 - e^{-1/beta}).
- ``damped-C0``: finite damping, start at alpha*t = 0; prefactor
  g0^2/(omega_p^2 + 1/T_d^2) with the damping-angle factor
  exp(+/-(pi - 2 theta) omega_q/alpha), tan(theta) = omega_p T_d.
- ``translated``: time-translated start (C > 0) in terms of the upper
  incomplete Gamma function.  Two formula variants ship: ``paper-literal``
  keeps the plain constant C as the second Gamma argument, while
  ``corrected-substitution`` uses (1/T_d - i omega_p) C / alpha, which is what
  the change of variables in the defining integral produces.  The quadrature
  oracle arbitrates between them; both reduce to ``damped-C0`` as C -> 0.

Effective probabilities are always derived as p_eff = p_final omega_p^2/g0^2,
so the relation holds as an invariant rather than by independent evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from scipy.constants import hbar, k as k_B

from .hamiltonians import ModelParams
from .special import upper_incomplete_gamma

__all__ = [
    "ClosedFormResult",
    "p_final_ideal",
    "p_final_damped",
    "p_final_translated",
    "closed_form_pair",
    "thermometry",
    "closed_form_csv",
    "PROCESSES",
    "CLOSED_FORM_VARIANTS",
]

PROCESSES = ("excitation", "emission")
CLOSED_FORM_VARIANTS = ("ideal", "damped-C0", "translated")
TRANSLATED_FORMULAS = ("paper-literal", "corrected-substitution")


@dataclass(frozen=True)
class ClosedFormResult:
    """One closed-form evaluation at one parameter point."""

    process: str
    variant: str
    p_final: float
    p_eff: float
    beta: float
    theta: float
    a_scale: float
    formula: str | None = None
    eta_pair: float | None = None
    note: str = ""


def _check_process(process: str):
    if process not in PROCESSES:
        raise ValueError(f"process must be one of {PROCESSES}, got {process!r}")


def _planck_factor(x: float, process: str) -> float:
    """x/(e^x - 1) for excitation, x/(1 - e^{-x}) for emission (x = 1/beta)."""
    if process == "excitation":
        return x / math.expm1(x)
    return x / (-math.expm1(-x))


def _theta(params: ModelParams) -> float:
    return math.atan(params.omega_p * params.T_d)


def _a_scale(params: ModelParams) -> float:
    return math.hypot(params.omega_p, 1.0 / params.T_d) / params.alpha


def p_final_ideal(params: ModelParams, process: str) -> ClosedFormResult:
    """Planck-factor final probability in the omega_p*T_d >> 1 limit."""
    _check_process(process)
    if params.alpha <= 0:
        raise ValueError("closed forms require alpha > 0")
    x = 2.0 * math.pi * params.omega_q / params.alpha  # = 1/beta
    p_eff = _planck_factor(x, process)
    ratio = params.g0 ** 2 / params.omega_p ** 2
    return ClosedFormResult(
        process=process, variant="ideal", p_final=ratio * p_eff, p_eff=p_eff,
        beta=params.beta, theta=0.5 * math.pi, a_scale=_a_scale(params),
        note="assumes omega_p*T_d >> 1",
    )


def p_final_damped(params: ModelParams, process: str) -> ClosedFormResult:
    """Finite-damping final probability for the alpha*t-from-zero start (C = 0)."""
    _check_process(process)
    if params.alpha <= 0:
        raise ValueError("closed forms require alpha > 0")
    nu = params.omega_q / params.alpha
    th = _theta(params)
    pref = params.g0 ** 2 / (params.omega_p ** 2 + params.T_d ** -2)
    two_pi_nu = 2.0 * math.pi * nu
    if process == "excitation":
        p = pref * two_pi_nu * math.exp((math.pi - 2.0 * th) * nu) / math.expm1(two_pi_nu)
    else:
        p = pref * two_pi_nu * math.exp((2.0 * th - math.pi) * nu) / (-math.expm1(-two_pi_nu))
    p_eff = p * params.omega_p ** 2 / params.g0 ** 2
    return ClosedFormResult(
        process=process, variant="damped-C0", p_final=p, p_eff=p_eff,
        beta=params.beta, theta=th, a_scale=_a_scale(params),
    )


def p_final_translated(params: ModelParams, process: str,
                       formula: str = "corrected-substitution") -> ClosedFormResult:
    """Final probability for the time-translated start (C > 0).

    Both formula variants share the prefactor
    [g0^2/(omega_p^2 + 1/T_d^2)] exp(2C/(alpha T_d)) exp(-/+ 2 theta nu)
    and differ only in the second argument of |Gamma(1 +/- i nu, .)|^2:
    the printed constant C versus the substitution result (1/T_d - i omega_p) C/alpha.
    """
    _check_process(process)
    if formula not in TRANSLATED_FORMULAS:
        raise ValueError(f"formula must be one of {TRANSLATED_FORMULAS}")
    if params.alpha <= 0:
        raise ValueError("closed forms require alpha > 0")
    if params.C <= 0:
        raise ValueError("translated closed form requires C > 0 (use p_final_damped at C = 0)")
    nu = params.omega_q / params.alpha
    th = _theta(params)
    sign = +1.0 if process == "excitation" else -1.0
    a = 1.0 + sign * 1j * nu
    if formula == "paper-literal":
        z2 = complex(params.C, 0.0)
    else:
        z2 = (1.0 / params.T_d - 1j * params.omega_p) * params.C / params.alpha
    gam = upper_incomplete_gamma(a, z2)
    pref = (params.g0 ** 2 / (params.omega_p ** 2 + params.T_d ** -2)
            * math.exp(2.0 * params.C / (params.alpha * params.T_d))
            * math.exp(-sign * 2.0 * th * nu))
    p = pref * abs(gam.value) ** 2
    p_eff = p * params.omega_p ** 2 / params.g0 ** 2
    return ClosedFormResult(
        process=process, variant="translated", p_final=p, p_eff=p_eff,
        beta=params.beta, theta=th, a_scale=_a_scale(params), formula=formula,
        note=f"incomplete-gamma method: {gam.method}",
    )


def closed_form_pair(params: ModelParams, variant: str = "ideal",
                     formula: str = "corrected-substitution"):
    """(excitation, emission) results with the detailed-balance ratio attached."""
    if variant == "ideal":
        exc, emi = p_final_ideal(params, "excitation"), p_final_ideal(params, "emission")
    elif variant == "damped-C0":
        exc, emi = p_final_damped(params, "excitation"), p_final_damped(params, "emission")
    elif variant == "translated":
        exc = p_final_translated(params, "excitation", formula)
        emi = p_final_translated(params, "emission", formula)
    else:
        raise ValueError(f"variant must be one of {CLOSED_FORM_VARIANTS}")
    eta = emi.p_eff / exc.p_eff
    return replace(exc, eta_pair=eta), replace(emi, eta_pair=eta)


def thermometry(p_eff_exc: float, p_eff_emi: float, omega_q: float):
    """(beta_fit, T_fit, eta) from an effective-probability pair.

    eta = p_eff_emi/p_eff_exc must exceed 1 for a thermal interpretation;
    beta_fit = 1/ln(eta) and T_fit = beta_fit * hbar * omega_q / k_B.
    """
    if p_eff_exc <= 0:
        raise ValueError("p_eff_exc must be > 0")
    eta = p_eff_emi / p_eff_exc
    if eta <= 1.0:
        raise ValueError(f"eta = {eta} <= 1: input pair is not thermal, beta undefined")
    beta_fit = 1.0 / math.log(eta)
    t_fit = beta_fit * hbar * omega_q / k_B
    return beta_fit, t_fit, eta


def closed_form_csv(params_seq, variant: str = "ideal",
                    formula: str = "corrected-substitution") -> str:
    """Sweep table: alpha_per_s, beta, p_exc_final, p_emi_final, p_exc_eff,
    p_emi_eff, eta, variant (12 significant digits)."""
    lines = ["alpha_per_s,beta,p_exc_final,p_emi_final,p_exc_eff,p_emi_eff,eta,variant"]
    for params in params_seq:
        exc, emi = closed_form_pair(params, variant, formula)
        tag = variant if variant != "translated" else f"translated:{formula}"
        lines.append(
            f"{params.alpha:.12g},{params.beta:.12g},{exc.p_final:.12g},"
            f"{emi.p_final:.12g},{exc.p_eff:.12g},{emi.p_eff:.12g},"
            f"{exc.eta_pair:.12g},{tag}"
        )
    return "\n".join(lines) + "\n"
