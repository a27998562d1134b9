"""Heat flows, steady currents, negativity, and the critical-current witness.

Sign conventions: heat flowing from a bath into its qubit is positive, so
the cold flow is negative in normal engine operation; the steady current is
the hot flow minus the cold flow. The energy operator in the heat flow is
the full system Hamiltonian (bare gaps plus tunnelling plus exchange
coupling), which is the choice that makes the two steady flows sum to zero
identically and reproduces the closed-form currents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .analytic import (
    GlobalSteadyState,
    LocalSteadyState,
    _branch_rate_sums,
    global_closed_form,
    local_closed_form,
)
from .core import Bath, Branch, DensityMatrix, EngineParams, Regime, bose_einstein
from .errors import DomainError, UnsupportedAnalytic
from .liouvillian import (
    build_local,
    jump_operators,
    steady_state_numeric,
    system_hamiltonian,
)

__all__ = [
    "SteadyStateReport",
    "GlobalCriticalCurrent",
    "heat_flow",
    "current_local",
    "current_global",
    "coherence_from_current",
    "negativity",
    "negativity_closed_form_local",
    "critical_current_local",
    "critical_current_global",
    "report",
]


def heat_flow(state: DensityMatrix, params: EngineParams, bath: Bath) -> float:
    """Energy flow from one bath into the system for the given state.

    Tr[H . D_bath(rho)] with H the full system Hamiltonian and D_bath the
    bath's dissipator in the regime selected by params.
    """
    rho = state.matrix
    dissipated = np.zeros((4, 4), dtype=complex)
    for rate, op in jump_operators(params, bath):
        op_dag = op.conj().T
        op_dag_op = op_dag @ op
        dissipated += rate * (
            op @ rho @ op_dag - 0.5 * (op_dag_op @ rho + rho @ op_dag_op)
        )
    return float(np.trace(system_hamiltonian(params) @ dissipated).real)


def current_local(params: EngineParams) -> float:
    """Closed-form steady heat current of the local engine (no tunnelling)."""
    if params.regime is not Regime.LOCAL:
        raise DomainError("current_local requires the local regime")
    if params.kappa_h != 0.0 or params.kappa_c != 0.0:
        raise UnsupportedAnalytic(
            "no closed-form current with tunnelling; use heat_flow on the numeric state"
        )
    ss = local_closed_form(params)
    occ_h = bose_einstein(params.eps_h, params.temp_h)
    occ_c = bose_einstein(params.eps_c, params.temp_c)
    weight = params.eps_h * ss.gamma_c_tot + params.eps_c * ss.gamma_h_tot
    return (8.0 * params.g**2 / ss.chi) * params.gamma_h * params.gamma_c \
        * weight * (occ_h - occ_c)


def _global_current_pieces(params: EngineParams) -> tuple[float, float]:
    """(bracket, chi_gl) shared by the global current and its critical value."""
    minus_energy = params.eps_h - params.g
    plus_energy = params.eps_h + params.g
    gp_m, gm_m = _branch_rate_sums(params, Branch.MINUS)
    gp_p, gm_p = _branch_rate_sums(params, Branch.PLUS)
    total_minus = gp_m + gm_m
    total_plus = gp_p + gm_p
    chi_gl = total_minus * total_plus
    bracket = minus_energy * total_plus * (
        bose_einstein(minus_energy, params.temp_h) - bose_einstein(minus_energy, params.temp_c)
    ) + plus_energy * total_minus * (
        bose_einstein(plus_energy, params.temp_h) - bose_einstein(plus_energy, params.temp_c)
    )
    return bracket, chi_gl


def current_global(params: EngineParams) -> float:
    """Closed-form steady heat current of the global engine."""
    if params.regime is not Regime.GLOBAL:
        raise DomainError("current_global requires the global regime")
    bracket, chi_gl = _global_current_pieces(params)
    return params.gamma_h * params.gamma_c * bracket / chi_gl


def coherence_from_current(current: float, params: EngineParams) -> complex:
    """Steady coherence implied by a steady current through the exchange link.

    The same rate combinations connect the two; the relation is undefined at
    g = 0 where both the current and the coherence vanish identically.
    """
    if params.regime is not Regime.LOCAL:
        raise DomainError("coherence_from_current requires the local regime")
    if params.kappa_h != 0.0 or params.kappa_c != 0.0:
        raise UnsupportedAnalytic("the coherence-current relation assumes no tunnelling")
    if params.g == 0.0:
        raise DomainError("coherence_from_current is undefined at g = 0")
    ss = local_closed_form(params)
    weight = params.eps_h * ss.gamma_c_tot + params.eps_c * ss.gamma_h_tot
    return current * (1j * ss.big_gamma - 2.0 * params.delta) / (4.0 * params.g * weight)


def _partial_transpose(rho: np.ndarray, qubit: int) -> np.ndarray:
    tensor = rho.reshape(2, 2, 2, 2)
    if qubit == 0:
        tensor = tensor.transpose(2, 1, 0, 3)
    else:
        tensor = tensor.transpose(0, 3, 2, 1)
    return tensor.reshape(4, 4)


def negativity(state: DensityMatrix) -> float:
    """Sum of |negative eigenvalues| of the partial transpose.

    Works for any two-qubit state, not only the X-shaped steady states. The
    value does not depend on which qubit is transposed; both are computed
    and cross-checked.
    """
    rho = state.matrix
    values = []
    for qubit in (0, 1):
        eigenvalues = np.linalg.eigvalsh(_partial_transpose(rho, qubit))
        values.append(float(-eigenvalues[eigenvalues < 0.0].sum()))
    assert abs(values[0] - values[1]) < 1e-12, "partial transposes disagree"
    return values[0]


def negativity_closed_form_local(params: EngineParams) -> float:
    """Steady-state negativity of the local engine from the explicit rate algebra.

    Equivalent to running the eigenvalue route on the closed-form state; kept
    as an independent expression in the bath rates.
    """
    if params.regime is not Regime.LOCAL:
        raise DomainError("negativity_closed_form_local requires the local regime")
    if params.kappa_h != 0.0 or params.kappa_c != 0.0:
        raise UnsupportedAnalytic("no closed-form negativity with tunnelling")
    ss = local_closed_form(params)
    occ_h = bose_einstein(params.eps_h, params.temp_h)
    occ_c = bose_einstein(params.eps_c, params.temp_c)
    gph, gmh = params.gamma_h * occ_h, params.gamma_h * (1.0 + occ_h)
    gpc, gmc = params.gamma_c * occ_c, params.gamma_c * (1.0 + occ_c)
    g = params.g
    width = ss.big_gamma**2 + 4.0 * params.delta**2
    coef_a = params.gamma_h**2 + params.gamma_c**2 + 2.0 * (gph + gmc) * (gmh + gpc)
    coef_b = gmh * gmc + gph * gpc
    coef_c = (
        gph * gpc * (gph**2 + gpc**2)
        + gmh * gmc * (gmh**2 + gmc**2)
        + 2.0 * (gmh**2 + gph**2) * (gmc**2 + gpc**2)
        - (gmh * gph + gmc * gpc) * (gmh * gpc + gph * gmc)
        - 8.0 * gmh * gph * gmc * gpc
    )
    coef_d = (gmh * gmc - gph * gpc) ** 2
    root = math.sqrt(
        16.0 * g**4 * (params.gamma_h + params.gamma_c) ** 2 * ss.big_gamma**2
        + 8.0 * g**2 * coef_c * width
        + coef_d * width**2
    )
    value = (-4.0 * g**2 * coef_a - coef_b * width + root) / (2.0 * ss.chi)
    return max(0.0, value)


def critical_current_local(params: EngineParams) -> float:
    """Cut-off current above which the local steady state must be entangled."""
    ss = local_closed_form(params)
    weight = params.eps_h * ss.gamma_c_tot + params.eps_c * ss.gamma_h_tot
    width = ss.big_gamma**2 + 4.0 * params.delta**2
    return 4.0 * params.g * weight * math.sqrt(ss.r1 * ss.r4 / width)


class GlobalCriticalCurrent(NamedTuple):
    """Critical current of the global engine plus applicability flag.

    at_equilibrium is True when the witness carries no information: with
    equal bath temperatures the current vanishes while the (thermal) state
    may still be entangled, so the cut-off drops to zero.
    """

    value: float
    at_equilibrium: bool


def critical_current_global(params: EngineParams) -> GlobalCriticalCurrent:
    """Cut-off current for the global engine; zero with a flag at equilibrium.

    The underlying rate-difference denominator can take either sign, so the
    bound is reported as a magnitude; the witness then reads
    current > critical for entanglement, exactly like the local case.
    """
    ss = global_closed_form(params)
    if params.temp_h == params.temp_c or ss.d == 0.0:
        return GlobalCriticalCurrent(0.0, True)
    current = current_global(params)
    return GlobalCriticalCurrent(abs(current * math.sqrt(ss.s1 * ss.s4) / ss.d), False)


@dataclass(frozen=True)
class SteadyStateReport:
    """Steady state bundled with every derived observable."""

    state: DensityMatrix
    heat_flow_hot: float
    heat_flow_cold: float
    current: float
    coherence: complex
    negativity: float
    critical_current: float | None
    witness_ratio: float | None
    source: str                      # "analytic" or "numeric"
    witness_inapplicable: bool = False
    advisory: tuple[str, ...] = ()


def _ratio(current: float, critical: float | None) -> float | None:
    if critical is None or critical == 0.0:
        return None
    return current / critical


def report(params: EngineParams) -> SteadyStateReport:
    """Evaluate the steady state and all observables for one parameter set.

    Dispatches to the closed forms whenever they exist (local without
    tunnelling, or global); tunnelling configurations fall back to the
    numeric solver, where no critical current is defined.
    """
    advisory = params.validity_advisory()
    if params.regime is Regime.GLOBAL:
        ss: GlobalSteadyState = global_closed_form(params)
        state = ss.density_matrix()
        current = current_global(params)
        critical, at_equilibrium = critical_current_global(params)
        return SteadyStateReport(
            state=state,
            heat_flow_hot=0.5 * current,
            heat_flow_cold=-0.5 * current,
            current=current,
            coherence=complex(ss.d),
            negativity=negativity(state),
            critical_current=critical,
            witness_ratio=_ratio(current, critical),
            source="analytic",
            witness_inapplicable=at_equilibrium,
            advisory=advisory,
        )
    if params.kappa_h == 0.0 and params.kappa_c == 0.0:
        local: LocalSteadyState = local_closed_form(params)
        state = local.density_matrix()
        current = current_local(params)
        critical = critical_current_local(params)
        return SteadyStateReport(
            state=state,
            heat_flow_hot=0.5 * current,
            heat_flow_cold=-0.5 * current,
            current=current,
            coherence=local.c,
            negativity=negativity(state),
            critical_current=critical,
            witness_ratio=_ratio(current, critical),
            source="analytic",
            advisory=advisory,
        )
    state = steady_state_numeric(build_local(params))
    hot = heat_flow(state, params, Bath.HOT)
    cold = heat_flow(state, params, Bath.COLD)
    return SteadyStateReport(
        state=state,
        heat_flow_hot=hot,
        heat_flow_cold=cold,
        current=hot - cold,
        coherence=state.exchange_coherence,
        negativity=negativity(state),
        critical_current=None,
        witness_ratio=None,
        source="numeric",
        advisory=advisory,
    )
