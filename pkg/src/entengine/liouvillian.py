"""Vectorized Lindblad generators and the numeric steady-state machinery.

The density matrix is stacked row by row (C order) in the fixed basis
{|11>, |10>, |01>, |00>}; the affine form eliminates the |00><00|
population through the unit trace, leaving a 15-dimensional coordinate
vector p with dp/dt = M p + b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import RK45
from scipy.linalg import lu_factor, lu_solve

from .analytic import dressed_eigensystem
from .core import Bath, DensityMatrix, EngineParams, Regime, bose_einstein
from .errors import DegenerateSteadyState, DomainError, IntegrationError

__all__ = [
    "Liouvillian",
    "EvolutionResult",
    "system_hamiltonian",
    "jump_operators",
    "build_local",
    "build_global",
    "steady_state_numeric",
    "evolve",
]

# single-qubit operators in the basis (|1>, |0>)
_SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
_SIGMA_MINUS = _SIGMA_PLUS.T.copy()
_SIGMA_X = _SIGMA_PLUS + _SIGMA_MINUS
_NUMBER = _SIGMA_PLUS @ _SIGMA_MINUS
_ID2 = np.eye(2, dtype=complex)
_ID4 = np.eye(4, dtype=complex)

# vectorization bookkeeping: row-major index of rho[i, j] is 4*i + j;
# coordinate 15 (the |00><00| population) is eliminated by the trace
_DROPPED = 15
_KEEP = tuple(k for k in range(16) if k != _DROPPED)
_DIAGONAL_KEPT = (0, 5, 10)

SOLVER_CONDITION_LIMIT = 1e12
INTEGRATOR_RTOL = 1e-10
INTEGRATOR_ATOL = 1e-12
CONVERGENCE_NORM = 1e-12
CONVERGENCE_WINDOW = 2


def hot_operator(single: np.ndarray) -> np.ndarray:
    """Embed a single-qubit operator on the hot (first) qubit."""
    return np.kron(single, _ID2)


def cold_operator(single: np.ndarray) -> np.ndarray:
    """Embed a single-qubit operator on the cold (second) qubit."""
    return np.kron(_ID2, single)


def system_hamiltonian(params: EngineParams) -> np.ndarray:
    """Full system Hamiltonian: bare gaps, tunnelling terms, exchange coupling."""
    h = params.eps_h * hot_operator(_NUMBER) + params.eps_c * cold_operator(_NUMBER)
    h = h + params.g * (
        hot_operator(_SIGMA_PLUS) @ cold_operator(_SIGMA_MINUS)
        + hot_operator(_SIGMA_MINUS) @ cold_operator(_SIGMA_PLUS)
    )
    if params.kappa_h != 0.0:
        h = h + params.kappa_h * hot_operator(_SIGMA_X)
    if params.kappa_c != 0.0:
        h = h + params.kappa_c * cold_operator(_SIGMA_X)
    return h


def _local_jump_operators(params: EngineParams, bath: Bath) -> list[tuple[float, np.ndarray]]:
    gamma = params.bath_gamma(bath)
    if gamma == 0.0:
        return []
    embed = hot_operator if bath is Bath.HOT else cold_operator
    occupancy = bose_einstein(params.bath_energy(bath), params.bath_temp(bath))
    return [
        (gamma * occupancy, embed(_SIGMA_PLUS)),
        (gamma * (1.0 + occupancy), embed(_SIGMA_MINUS)),
    ]


def _global_jump_operators(params: EngineParams, bath: Bath) -> list[tuple[float, np.ndarray]]:
    gamma = params.bath_gamma(bath)
    if gamma == 0.0:
        return []
    pairs = dressed_eigensystem(params.eps_h, params.g)
    projectors = [np.outer(v, v.conj()) for _, v in pairs]
    ground, anti, sym, doubly = projectors
    lowering = hot_operator(_SIGMA_MINUS) if bath is Bath.HOT else cold_operator(_SIGMA_MINUS)
    # one jump operator per dressed transition energy, summing the two
    # transitions that share it
    jump_minus = ground @ lowering @ anti + sym @ lowering @ doubly
    jump_plus = ground @ lowering @ sym + anti @ lowering @ doubly
    temp = params.bath_temp(bath)
    ops: list[tuple[float, np.ndarray]] = []
    for energy, jump in ((pairs[1][0], jump_minus), (pairs[2][0], jump_plus)):
        occupancy = bose_einstein(energy, temp)
        ops.append((gamma * (1.0 + occupancy), jump))
        ops.append((gamma * occupancy, jump.conj().T))
    return ops


def jump_operators(params: EngineParams, bath: Bath) -> list[tuple[float, np.ndarray]]:
    """Weighted jump operators of one bath, [(rate, operator), ...].

    Local regime: raising/lowering of the bath's own qubit at its bare gap.
    Global regime: dressed-transition operators at the split energies.
    """
    if params.regime is Regime.LOCAL:
        return _local_jump_operators(params, bath)
    return _global_jump_operators(params, bath)


def vectorize(rho: np.ndarray) -> np.ndarray:
    """Row-major stacking of a 4x4 matrix into a 16-vector."""
    return np.asarray(rho, dtype=complex).reshape(16)

def unvectorize(vec: np.ndarray) -> np.ndarray:
    return np.asarray(vec, dtype=complex).reshape(4, 4)


def reduce_state(rho: np.ndarray) -> np.ndarray:
    """Affine coordinates of a unit-trace matrix (the 15 kept components)."""
    return vectorize(rho)[list(_KEEP)]


def embed_state(coords: np.ndarray) -> np.ndarray:
    """Inverse of reduce_state; restores the eliminated population."""
    full = np.zeros(16, dtype=complex)
    full[list(_KEEP)] = coords
    full[_DROPPED] = 1.0 - full[0] - full[5] - full[10]
    return unvectorize(full)


@dataclass(frozen=True)
class Liouvillian:
    """Vectorized generator in both affine and full homogeneous form."""

    affine_matrix: np.ndarray       # 15x15
    inhomogeneity: np.ndarray       # 15
    full_superoperator: np.ndarray  # 16x16
    regime_tag: Regime

    def __post_init__(self):
        for name in ("affine_matrix", "inhomogeneity", "full_superoperator"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def derivative(self, coords: np.ndarray) -> np.ndarray:
        """dp/dt at the given affine coordinates."""
        return self.affine_matrix @ coords + self.inhomogeneity

    def residual_norm(self, coords: np.ndarray) -> float:
        """Frobenius norm of d(rho)/dt at the given affine coordinates."""
        reduced = self.derivative(coords)
        dropped = -(reduced[0] + reduced[5] + reduced[10])
        return float(math.hypot(np.linalg.norm(reduced), abs(dropped)))


def _superoperator(hamiltonian: np.ndarray,
                   jumps: list[tuple[float, np.ndarray]]) -> np.ndarray:
    """16x16 generator for the row-major stacking vec(A rho B) = (A kron B^T) vec(rho)."""
    lindblad = -1j * (np.kron(hamiltonian, _ID4) - np.kron(_ID4, hamiltonian.T))
    for rate, op in jumps:
        if rate == 0.0:
            continue
        op_dag_op = op.conj().T @ op
        lindblad = lindblad + rate * (
            np.kron(op, op.conj())
            - 0.5 * (np.kron(op_dag_op, _ID4) + np.kron(_ID4, op_dag_op.T))
        )
    return lindblad


def _assemble(params: EngineParams) -> Liouvillian:
    jumps = jump_operators(params, Bath.HOT) + jump_operators(params, Bath.COLD)
    full = _superoperator(system_hamiltonian(params), jumps)
    keep = list(_KEEP)
    affine = full[np.ix_(keep, keep)].copy()
    trace_column = full[keep, _DROPPED]
    for position, coord in enumerate(keep):
        if coord in _DIAGONAL_KEPT:
            affine[:, position] -= trace_column
    return Liouvillian(affine, trace_column.copy(), full, params.regime)


def build_local(params: EngineParams) -> Liouvillian:
    """Generator of the local master equation (tunnelling terms allowed)."""
    if params.regime is not Regime.LOCAL:
        raise DomainError("build_local requires the local regime")
    return _assemble(params)


def build_global(params: EngineParams) -> Liouvillian:
    """Generator of the global master equation (resonant, 0 < g < eps_h)."""
    if params.regime is not Regime.GLOBAL:
        raise DomainError("build_global requires the global regime")
    return _assemble(params)


def _null_space_dimension(full: np.ndarray) -> int:
    singular_values = np.linalg.svd(full, compute_uv=False)
    cutoff = max(singular_values.max(), 1.0) * 1e-10
    return int(np.sum(singular_values < cutoff))


def steady_state_numeric(liou: Liouvillian) -> DensityMatrix:
    """Unique steady state from a direct dense solve of the affine system.

    Raises DegenerateSteadyState when the system is numerically singular
    (no unique stationary state), reporting the null-space dimension of the
    full superoperator.
    """
    m = liou.affine_matrix
    if np.linalg.cond(m) > SOLVER_CONDITION_LIMIT:
        dim = _null_space_dimension(liou.full_superoperator)
        raise DegenerateSteadyState(
            f"stationary state is not unique (null-space dimension {dim})", dim
        )
    factor = lu_factor(m)
    coords = lu_solve(factor, -liou.inhomogeneity)
    for _ in range(2):  # iterative refinement keeps the residual at rounding level
        coords -= lu_solve(factor, liou.derivative(coords))
    rho = embed_state(coords)
    return DensityMatrix(0.5 * (rho + rho.conj().T))


@dataclass(frozen=True)
class EvolutionResult:
    """Outcome of time evolution: final state plus convergence diagnostics."""

    state: DensityMatrix
    time: float
    converged: bool
    residual_norm: float


def evolve(liou: Liouvillian, initial: DensityMatrix, t_final: float,
           dt_max: float = math.inf) -> EvolutionResult:
    """Integrate dp/dt = M p + b with an adaptive Dormand-Prince 4(5) stepper.

    Stops early (converged = True) once the derivative norm stays below
    CONVERGENCE_NORM for CONVERGENCE_WINDOW consecutive accepted steps, which
    avoids declaring convergence on a single slow-transient sample.
    """
    if not (t_final > 0.0) or not math.isfinite(t_final):
        raise DomainError(f"t_final must be positive and finite, got {t_final}")
    if not (dt_max > 0.0):
        raise DomainError(f"dt_max must be positive, got {dt_max}")
    coords = reduce_state(initial.matrix)
    stepper = RK45(
        lambda _t, y: liou.derivative(y),
        0.0,
        coords,
        t_bound=t_final,
        max_step=dt_max,
        rtol=INTEGRATOR_RTOL,
        atol=INTEGRATOR_ATOL,
    )
    converged = False
    quiet_steps = 0
    while stepper.status == "running":
        message = stepper.step()
        if stepper.status == "failed":
            raise IntegrationError(f"step size underflow at t = {stepper.t}: {message}")
        if liou.residual_norm(stepper.y) < CONVERGENCE_NORM:
            quiet_steps += 1
            if quiet_steps >= CONVERGENCE_WINDOW:
                converged = True
                break
        else:
            quiet_steps = 0
    state = DensityMatrix(embed_state(stepper.y))
    return EvolutionResult(state, float(stepper.t), converged, liou.residual_norm(stepper.y))
