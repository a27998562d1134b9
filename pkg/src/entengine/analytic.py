"""Closed-form steady states, thermal states, and the dressed eigensystem.

These expressions double as fast paths and as oracles for the numeric
solver; every quantity is reported in the fixed computational basis
{|11>, |10>, |01>, |00>}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Bath, Branch, DensityMatrix, EngineParams, Regime, bose_einstein
from .errors import DomainError, UnsupportedAnalytic

__all__ = [
    "LocalSteadyState",
    "GlobalSteadyState",
    "local_closed_form",
    "global_closed_form",
    "thermal_state",
    "thermal_negativity",
    "dressed_eigensystem",
]


@dataclass(frozen=True)
class LocalSteadyState:
    """Steady state of the local master equation (no tunnelling).

    r1..r4 are the populations of |11>, |10>, |01>, |00>; c is the
    |10><01| coherence. chi, big_gamma, gamma_h_tot and gamma_c_tot are the
    rate combinations entering the closed forms.
    """

    r1: float
    r2: float
    r3: float
    r4: float
    c: complex
    chi: float
    big_gamma: float
    gamma_h_tot: float
    gamma_c_tot: float

    def density_matrix(self) -> DensityMatrix:
        m = np.zeros((4, 4), dtype=complex)
        m[0, 0], m[1, 1], m[2, 2], m[3, 3] = self.r1, self.r2, self.r3, self.r4
        m[1, 2] = self.c
        m[2, 1] = np.conj(self.c)
        return DensityMatrix(m)


@dataclass(frozen=True)
class GlobalSteadyState:
    """Steady state of the global master equation (resonant, dressed baths).

    s2 == s3 by construction and the coherence d is real.
    """

    s1: float
    s2: float
    s3: float
    s4: float
    d: float
    chi_gl: float

    def density_matrix(self) -> DensityMatrix:
        m = np.zeros((4, 4), dtype=complex)
        m[0, 0], m[1, 1], m[2, 2], m[3, 3] = self.s1, self.s2, self.s3, self.s4
        m[1, 2] = self.d
        m[2, 1] = self.d
        return DensityMatrix(m)


def _local_rate_set(params: EngineParams) -> tuple[float, float, float, float]:
    """(gamma_h_plus, gamma_h_minus, gamma_c_plus, gamma_c_minus), zero-safe."""
    n_h = bose_einstein(params.eps_h, params.temp_h)
    n_c = bose_einstein(params.eps_c, params.temp_c)
    return (
        params.gamma_h * n_h,
        params.gamma_h * (1.0 + n_h),
        params.gamma_c * n_c,
        params.gamma_c * (1.0 + n_c),
    )


def local_closed_form(params: EngineParams) -> LocalSteadyState:
    """Analytic steady state of the local master equation.

    Requires the local regime without tunnelling; with kappa != 0 there is
    no closed form and the numeric solver must be used instead.
    """
    if params.regime is not Regime.LOCAL:
        raise DomainError("local_closed_form requires the local regime")
    if params.kappa_h != 0.0 or params.kappa_c != 0.0:
        raise UnsupportedAnalytic(
            "no closed form with tunnelling; use the numeric steady state"
        )
    gph, gmh, gpc, gmc = _local_rate_set(params)
    gamma_h_tot = gmh + gph
    gamma_c_tot = gmc + gpc
    big_gamma = gamma_h_tot + gamma_c_tot
    g, delta = params.g, params.delta
    width = big_gamma**2 + 4.0 * delta**2
    chi = (4.0 * g**2 + gamma_h_tot * gamma_c_tot) * big_gamma**2 \
        + 4.0 * delta**2 * gamma_h_tot * gamma_c_tot
    if chi <= 0.0:
        raise DomainError("steady state is not unique for these parameters (chi = 0)")
    r1 = (4.0 * g**2 * (gph + gpc) ** 2 + gph * gpc * width) / chi
    r2 = (4.0 * g**2 * (gmh + gmc) * (gph + gpc) + gph * gmc * width) / chi
    r3 = (4.0 * g**2 * (gmh + gmc) * (gph + gpc) + gmh * gpc * width) / chi
    r4 = (4.0 * g**2 * (gmh + gmc) ** 2 + gmh * gmc * width) / chi
    c = 2.0 * g * (gph * gmc - gmh * gpc) * (1j * big_gamma - 2.0 * delta) / chi
    return LocalSteadyState(r1, r2, r3, r4, c, chi, big_gamma, gamma_h_tot, gamma_c_tot)


def global_closed_form(params: EngineParams) -> GlobalSteadyState:
    """Analytic steady state of the global master equation."""
    if params.regime is not Regime.GLOBAL:
        raise DomainError("global_closed_form requires the global regime")
    gp_m, gm_m = _branch_rate_sums(params, Branch.MINUS)
    gp_p, gm_p = _branch_rate_sums(params, Branch.PLUS)
    chi_gl = (gp_m + gm_m) * (gp_p + gm_p)
    if chi_gl <= 0.0:
        raise DomainError("steady state is not unique for these parameters (chi_gl = 0)")
    s1 = gp_m * gp_p / chi_gl
    s2 = (gp_m * gm_p + gm_m * gp_p) / (2.0 * chi_gl)
    s4 = gm_m * gm_p / chi_gl
    d = (gm_m * gp_p - gp_m * gm_p) / (2.0 * chi_gl)
    return GlobalSteadyState(s1, s2, s2, s4, d, chi_gl)


def _branch_rate_sums(params: EngineParams, branch: Branch) -> tuple[float, float]:
    """Summed absorption/emission rates of both baths at one dressed energy."""
    energy = params.eps_h - params.g if branch is Branch.MINUS else params.eps_h + params.g
    if energy <= 0.0:
        raise DomainError(f"dressed transition energy must be > 0, got {energy}")
    total_plus = 0.0
    total_minus = 0.0
    for bath in (Bath.HOT, Bath.COLD):
        gamma = params.bath_gamma(bath)
        occupancy = bose_einstein(energy, params.bath_temp(bath))
        total_plus += gamma * occupancy
        total_minus += gamma * (1.0 + occupancy)
    return total_plus, total_minus


def dressed_eigensystem(eps: float, g: float) -> list[tuple[float, np.ndarray]]:
    """Eigenpairs of the resonant two-qubit Hamiltonian with exchange coupling.

    Returns the four (energy, unit vector) pairs in the fixed order
    (0, eps - g, eps + g, 2 eps); the middle two states are the entangled
    (anti)symmetric single-excitation combinations. The order is kept even
    when g > eps makes the spectrum cross.
    """
    if eps <= 0.0:
        raise DomainError(f"dressed_eigensystem requires eps > 0, got {eps}")
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    ground = np.array([0, 0, 0, 1], dtype=complex)
    antisym = np.array([0, -inv_sqrt2, inv_sqrt2, 0], dtype=complex)
    sym = np.array([0, inv_sqrt2, inv_sqrt2, 0], dtype=complex)
    doubly = np.array([1, 0, 0, 0], dtype=complex)
    return [
        (0.0, ground),
        (eps - g, antisym),
        (eps + g, sym),
        (2.0 * eps, doubly),
    ]


def thermal_state(eps: float, g: float, temp: float) -> DensityMatrix:
    """Gibbs state of the resonant coupled pair at temperature temp.

    Built from the dressed spectrum with max-shifted Boltzmann weights, so
    it stays finite for arbitrarily small temperatures.
    """
    if temp <= 0.0:
        raise DomainError(f"thermal_state requires temp > 0, got {temp}")
    pairs = dressed_eigensystem(eps, g)
    energies = np.array([e for e, _ in pairs])
    weights = np.exp(-(energies - energies.min()) / temp)
    weights /= weights.sum()
    m = np.zeros((4, 4), dtype=complex)
    for w, (_, vec) in zip(weights, pairs):
        m += w * np.outer(vec, vec.conj())
    return DensityMatrix(m)


def thermal_negativity(eps: float, g: float, temp: float) -> float:
    """Negativity of the thermal state; positive iff sinh(g/temp)^2 > 1.

    Evaluated in a max-exponent-scaled form so that low temperatures do not
    overflow the intermediate hyperbolic functions.
    """
    if temp <= 0.0:
        raise DomainError(f"thermal_negativity requires temp > 0, got {temp}")
    if eps <= 0.0:
        raise DomainError(f"thermal_negativity requires eps > 0, got {eps}")
    a = eps / temp
    b = abs(g) / temp
    m = max(a, b)
    cosh_a = 0.5 * (math.exp(a - m) + math.exp(-a - m))
    cosh_b = 0.5 * (math.exp(b - m) + math.exp(-b - m))
    sinh_a = 0.5 * (math.exp(a - m) - math.exp(-a - m))
    sinh_b = 0.5 * (math.exp(b - m) - math.exp(-b - m))
    # scaled numerator sinh(b)^2 - 1 and denominator, common factor exp(2m)
    numerator = sinh_b**2 - math.exp(-2.0 * m)
    denominator = (math.hypot(sinh_a, sinh_b) + cosh_a) * 2.0 * (cosh_a + cosh_b)
    return max(0.0, numerator / denominator)
