"""Domain types, parameter validation, and bath statistics.

Units: hbar = k_B = 1 throughout; energies, temperatures, and rates are
dimensionless ratios to a common scale (conventionally the hot-qubit gap).
The two-qubit computational basis is fixed to {|11>, |10>, |01>, |00>},
with the first slot referring to the hot qubit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from enum import Enum

import numpy as np

from .errors import DomainError

# exp(x) overflows float64 near x = 709; the occupancy there underflows anyway
_EXP_ARG_MAX = 700.0

HERMITICITY_ATOL = 1e-12
TRACE_ATOL = 1e-12
EIGENVALUE_FLOOR = -1e-10

BASIS_LABELS = ("|11>", "|10>", "|01>", "|00>")


class Regime(Enum):
    """Which master equation models the qubit-bath coupling."""

    LOCAL = "local"
    GLOBAL = "global"


class Bath(Enum):
    HOT = "hot"
    COLD = "cold"


class Branch(Enum):
    """Dressed transition-energy branch: MINUS is eps - g, PLUS is eps + g."""

    MINUS = "minus"
    PLUS = "plus"


def bose_einstein(energy: float, temp: float) -> float:
    """Bose-Einstein occupancy 1/(exp(energy/temp) - 1).

    Parameters
    ----------
    energy : float
        Mode energy, must be positive (the occupancy diverges at zero).
    temp : float
        Bath temperature, must be non-negative. temp == 0 returns exactly 0.

    Returns
    -------
    float
        Mean occupancy, >= 0. Computed via expm1 so that energy/temp >> 1
        underflows to 0 instead of producing NaN, and small arguments keep
        full precision.
    """
    if not (energy > 0.0) or not math.isfinite(energy):
        raise DomainError(f"bose_einstein requires energy > 0, got {energy}")
    if temp < 0.0 or not math.isfinite(temp):
        raise DomainError(f"bose_einstein requires temp >= 0, got {temp}")
    if temp == 0.0:
        return 0.0
    x = energy / temp
    if x > _EXP_ARG_MAX:
        return 0.0
    return 1.0 / math.expm1(x)


@dataclass(frozen=True)
class EngineParams:
    """All physical parameters of the two-qubit engine.

    Attributes
    ----------
    eps_h : float
        Hot-qubit energy gap, > 0. The cold gap is eps_h + delta.
    delta : float
        Detuning between the cold and hot gaps.
    g : float
        Inter-qubit exchange coupling strength.
    gamma_h, gamma_c : float
        Bare qubit-bath coupling rates, >= 0. Zero is admitted only as a
        diagnostic (unitary) limit and is flagged by the validity advisory.
    temp_h, temp_c : float
        Bath temperatures, >= 0.
    kappa_h, kappa_c : float
        Tunnelling amplitudes (sigma_x terms in the qubit Hamiltonians).
    regime : Regime
        LOCAL for per-qubit dissipators, GLOBAL for dressed-basis dissipators.
        GLOBAL requires delta = 0, kappa_h = kappa_c = 0 and 0 < g < eps_h.
    """

    eps_h: float
    delta: float
    g: float
    gamma_h: float
    gamma_c: float
    temp_h: float
    temp_c: float
    kappa_h: float = 0.0
    kappa_c: float = 0.0
    regime: Regime = Regime.LOCAL

    def __post_init__(self):
        for f in fields(self):
            if f.name == "regime":
                continue
            value = getattr(self, f.name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise DomainError(f"{f.name} must be a finite number, got {value!r}")
            object.__setattr__(self, f.name, float(value))
        if not isinstance(self.regime, Regime):
            raise DomainError(f"regime must be a Regime, got {self.regime!r}")
        if self.eps_h <= 0.0:
            raise DomainError(f"eps_h must be > 0, got {self.eps_h}")
        if self.eps_c <= 0.0:
            raise DomainError(f"eps_h + delta must be > 0, got {self.eps_c}")
        if self.gamma_h < 0.0 or self.gamma_c < 0.0:
            raise DomainError("bath coupling rates must be >= 0")
        if self.temp_h < 0.0 or self.temp_c < 0.0:
            raise DomainError("bath temperatures must be >= 0")
        if self.regime is Regime.GLOBAL:
            if self.delta != 0.0:
                raise DomainError("global regime requires resonant qubits (delta = 0)")
            if self.kappa_h != 0.0 or self.kappa_c != 0.0:
                raise DomainError("global regime requires kappa_h = kappa_c = 0")
            if not (0.0 < self.g < self.eps_h):
                raise DomainError(
                    f"global regime requires 0 < g < eps_h, got g={self.g}, eps_h={self.eps_h}"
                )

    @property
    def eps_c(self) -> float:
        """Cold-qubit energy gap eps_h + delta."""
        return self.eps_h + self.delta

    def bath_gamma(self, bath: Bath) -> float:
        return self.gamma_h if bath is Bath.HOT else self.gamma_c

    def bath_temp(self, bath: Bath) -> float:
        return self.temp_h if bath is Bath.HOT else self.temp_c

    def bath_energy(self, bath: Bath) -> float:
        return self.eps_h if bath is Bath.HOT else self.eps_c

    def validity_advisory(self) -> tuple[str, ...]:
        """Warnings about parameter ranges that strain the model assumptions.

        These are advisories, never errors: the regimes of interest in the
        literature deliberately push some of them.
        """
        notes: list[str] = []
        if self.regime is Regime.LOCAL:
            gamma_max = max(self.gamma_h, self.gamma_c)
            if gamma_max > 0.0 and self.g > gamma_max:
                notes.append(
                    "inter-qubit coupling g exceeds both bath rates; the local "
                    "master equation assumes g of order gamma or smaller"
                )
            for name, gamma, eps in (
                ("gamma_h", self.gamma_h, self.eps_h),
                ("gamma_c", self.gamma_c, self.eps_c),
            ):
                if gamma > 0.1 * eps:
                    notes.append(
                        f"{name} is not small against the qubit gap; weak-coupling "
                        "dissipators may be inaccurate"
                    )
        if abs(self.delta) > 0.1 * self.eps_h:
            notes.append(
                "detuning exceeds 10% of the hot gap; results lie outside the "
                "small-detuning validity domain"
            )
        if self.kappa_h != 0.0 or self.kappa_c != 0.0:
            notes.append(
                "tunnelling terms modify only the Hamiltonian; the dissipators "
                "remain those of the bare qubits"
            )
        if self.gamma_h == 0.0 or self.gamma_c == 0.0:
            notes.append("a bath rate is zero; this is a dissipationless diagnostic limit")
        return tuple(notes)


@dataclass(frozen=True)
class BathRates:
    """Absorption/emission rate pair of one bath at one evaluation energy.

    Invariant: gamma_minus - gamma_plus equals the bare coupling rate exactly.
    """

    gamma_plus: float
    gamma_minus: float
    energy: float

    def __post_init__(self):
        if self.gamma_plus < 0.0:
            raise DomainError(f"gamma_plus must be >= 0, got {self.gamma_plus}")
        if self.energy > 0.0 and not self.gamma_minus > 0.0:
            raise DomainError("gamma_minus must be > 0 at positive energy")

    @property
    def bare(self) -> float:
        """Bare coupling rate gamma = gamma_minus - gamma_plus."""
        return self.gamma_minus - self.gamma_plus


def local_rates(params: EngineParams, bath: Bath) -> BathRates:
    """Bath rates evaluated at the bath's own qubit gap.

    gamma_plus = gamma * n_B(eps_j), gamma_minus = gamma * (1 + n_B(eps_j)).
    """
    gamma = params.bath_gamma(bath)
    if gamma == 0.0:
        raise DomainError(f"{bath.value} bath has zero coupling rate")
    energy = params.bath_energy(bath)
    occupancy = bose_einstein(energy, params.bath_temp(bath))
    return BathRates(gamma * occupancy, gamma * (1.0 + occupancy), energy)


def global_rates(params: EngineParams, bath: Bath, branch: Branch) -> BathRates:
    """Bath rates at the dressed transition energy eps_h -+ g.

    The evaluation energies are those of the resonant dressed spectrum; the
    lower branch must stay positive (g < eps_h), otherwise the occupancy
    diverges.
    """
    gamma = params.bath_gamma(bath)
    if gamma == 0.0:
        raise DomainError(f"{bath.value} bath has zero coupling rate")
    energy = params.eps_h - params.g if branch is Branch.MINUS else params.eps_h + params.g
    if energy <= 0.0:
        raise DomainError(
            f"dressed transition energy must be > 0, got {energy} (g >= eps_h)"
        )
    occupancy = bose_einstein(energy, params.bath_temp(bath))
    return BathRates(gamma * occupancy, gamma * (1.0 + occupancy), energy)


@dataclass(frozen=True)
class DensityMatrix:
    """A 4x4 density matrix in the fixed basis {|11>, |10>, |01>, |00>}.

    Construction validates hermiticity, unit trace, and positivity (up to
    small numerical tolerances); the stored array is read-only.
    """

    matrix: np.ndarray

    def __post_init__(self):
        arr = np.array(self.matrix, dtype=complex)
        if arr.shape != (4, 4):
            raise DomainError(f"density matrix must be 4x4, got shape {arr.shape}")
        if not np.all(np.isfinite(arr.view(float))):
            raise DomainError("density matrix contains non-finite entries")
        herm_dev = np.max(np.abs(arr - arr.conj().T))
        if herm_dev > HERMITICITY_ATOL:
            raise DomainError(f"density matrix not Hermitian (deviation {herm_dev:.3e})")
        trace_dev = abs(arr.trace() - 1.0)
        if trace_dev > TRACE_ATOL:
            raise DomainError(f"density matrix trace differs from 1 by {trace_dev:.3e}")
        lowest = float(np.linalg.eigvalsh(0.5 * (arr + arr.conj().T)).min())
        if lowest < EIGENVALUE_FLOOR:
            raise DomainError(f"density matrix has eigenvalue {lowest:.3e} < 0")
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    @property
    def populations(self) -> np.ndarray:
        """Diagonal occupations in the fixed basis order."""
        return np.real(np.diag(self.matrix)).copy()

    @property
    def exchange_coherence(self) -> complex:
        """The |10><01| matrix element (the only coherence an X state carries)."""
        return complex(self.matrix[1, 2])
