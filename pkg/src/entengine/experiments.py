"""Parameter sweeps, tunnelling-recovery search, negativity optimization,
figure datasets, and the CSV table format.

Everything here is deterministic: grids are fixed linear or logarithmic
spacings and the only refinement step is golden-section, so identical
inputs produce byte-identical tables.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, fields, replace
from enum import Enum
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from ._version import __version__
from .analytic import thermal_negativity
from .core import Bath, EngineParams, Regime
from .errors import DomainError, EngineError, FlatObjective, SpecError
from .liouvillian import build_local, steady_state_numeric
from .observables import heat_flow, negativity, report

__all__ = [
    "SweepAxis",
    "SweepSpec",
    "SweepTable",
    "Objective",
    "KappaMax",
    "FreeRange",
    "OptimizationResult",
    "sweep",
    "find_kappa_max",
    "optimize_negativity",
    "emit_figure",
    "FIGURE_IDS",
]

_PARAM_FIELDS = tuple(f.name for f in fields(EngineParams) if f.name != "regime")

OBSERVABLES = ("current", "negativity", "witness_ratio", "coherence", "critical_current")
_OBSERVABLE_COLUMNS = {
    "current": ("current",),
    "negativity": ("negativity",),
    "witness_ratio": ("witness_ratio",),
    "coherence": ("coherence_re", "coherence_im"),
    "critical_current": ("critical_current",),
}

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SweepAxis:
    """One swept parameter: an inclusive range with a fixed point count."""

    name: str
    start: float
    stop: float
    points: int

    def __post_init__(self):
        if self.name not in _PARAM_FIELDS:
            raise SpecError(f"unknown sweep parameter {self.name!r}")
        if not isinstance(self.points, int) or self.points < 2:
            raise SpecError(f"a sweep axis needs at least 2 points, got {self.points}")
        for edge in (self.start, self.stop):
            if not math.isfinite(edge):
                raise SpecError(f"axis range for {self.name} must be finite")

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class SweepSpec:
    """A validated sweep request over one or two parameters."""

    base: EngineParams
    axis1: SweepAxis
    axis2: SweepAxis | None = None
    observables: tuple[str, ...] = ("current", "negativity")

    def __post_init__(self):
        object.__setattr__(self, "observables", tuple(self.observables))
        if not self.observables:
            raise SpecError("at least one observable must be requested")
        for name in self.observables:
            if name not in OBSERVABLES:
                raise SpecError(f"unknown observable {name!r}")
        if self.axis2 is not None and self.axis2.name == self.axis1.name:
            raise SpecError("the two sweep axes must differ")
        for point in self.grid_points():
            values = dict(zip(self.axis_names(), point))
            try:
                replace(self.base, **values)
            except DomainError as exc:
                raise SpecError(f"grid point {values} violates parameter bounds: {exc}") from exc

    def axis_names(self) -> tuple[str, ...]:
        if self.axis2 is None:
            return (self.axis1.name,)
        return (self.axis1.name, self.axis2.name)

    def grid_points(self) -> Iterable[tuple[float, ...]]:
        """Grid coordinates, axis1 outermost, axis2 innermost."""
        if self.axis2 is None:
            for v1 in self.axis1.grid():
                yield (float(v1),)
        else:
            for v1 in self.axis1.grid():
                for v2 in self.axis2.grid():
                    yield (float(v1), float(v2))


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        raise SpecError("NaN is not allowed in sweep output")
    return f"{value:.17g}"


@dataclass(frozen=True)
class SweepTable:
    """Tabulated observables plus a self-describing metadata block."""

    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    metadata: tuple[tuple[str, str], ...]

    def csv_text(self) -> str:
        """UTF-8 CSV: '#'-prefixed key=value metadata, header row, data rows.

        Floats carry 17 significant digits so repeated runs are byte-stable.
        """
        buffer = io.StringIO()
        for key, value in self.metadata:
            buffer.write(f"# {key}={value}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_format_cell(cell) for cell in row])
        return buffer.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(self.csv_text())

    def column(self, name: str) -> list:
        index = self.columns.index(name)
        return [row[index] for row in self.rows]


def _base_metadata(params: EngineParams, extra: Sequence[tuple[str, str]] = ()) -> tuple:
    items: list[tuple[str, str]] = [("library_version", __version__)]
    items.extend((name, _format_cell(getattr(params, name))) for name in _PARAM_FIELDS)
    items.append(("regime", params.regime.value))
    items.extend(extra)
    return tuple(items)


def _observable_cells(rep, requested: tuple[str, ...]) -> tuple[list, list[str]]:
    cells: list = []
    notes: list[str] = []
    for name in requested:
        if name == "coherence":
            cells.extend([rep.coherence.real, rep.coherence.imag])
        elif name == "critical_current":
            cells.append(rep.critical_current)
            if rep.critical_current is None:
                notes.append("critical_current unavailable with tunnelling")
        elif name == "witness_ratio":
            cells.append(rep.witness_ratio)
            if rep.witness_ratio is None and rep.critical_current is None:
                notes.append("witness_ratio unavailable with tunnelling")
        else:
            cells.append(getattr(rep, name))
    return cells, notes


def sweep(spec: SweepSpec) -> SweepTable:
    """Evaluate the full report on every grid point of the spec.

    Per-point failures land in the trailing error column; the sweep itself
    only fails on an invalid spec.
    """
    axis_names = spec.axis_names()
    columns = list(axis_names)
    for name in spec.observables:
        columns.extend(_OBSERVABLE_COLUMNS[name])
    columns.append("error")
    blank = [None] * (len(columns) - len(axis_names) - 1)
    rows: list[tuple] = []
    for point in spec.grid_points():
        params = replace(spec.base, **dict(zip(axis_names, point)))
        try:
            rep = report(params)
            cells, notes = _observable_cells(rep, spec.observables)
            rows.append((*point, *cells, "; ".join(notes)))
        except EngineError as exc:
            rows.append((*point, *blank, f"{type(exc).__name__}: {exc}"))
    extra = [(f"axis{i + 1}", f"{ax.name}:{ax.start:.17g}:{ax.stop:.17g}:{ax.points}")
             for i, ax in enumerate(filter(None, (spec.axis1, spec.axis2)))]
    extra.append(("observables", ",".join(spec.observables)))
    return SweepTable(tuple(columns), tuple(rows), _base_metadata(spec.base, extra))


# ---------------------------------------------------------------------------
# deterministic 1-d maximization


def _golden_max(fun: Callable[[float], float], lo: float, hi: float,
                tol: float) -> tuple[float, float]:
    """Golden-section maximization on [lo, hi] down to interval width tol."""
    inner_lo = hi - _GOLDEN * (hi - lo)
    inner_hi = lo + _GOLDEN * (hi - lo)
    f_lo, f_hi = fun(inner_lo), fun(inner_hi)
    while (hi - lo) > tol:
        if f_lo >= f_hi:
            hi, inner_hi, f_hi = inner_hi, inner_lo, f_lo
            inner_lo = hi - _GOLDEN * (hi - lo)
            f_lo = fun(inner_lo)
        else:
            lo, inner_lo, f_lo = inner_lo, inner_hi, f_hi
            inner_hi = lo + _GOLDEN * (hi - lo)
            f_hi = fun(inner_hi)
    return (inner_lo, f_lo) if f_lo >= f_hi else (inner_hi, f_hi)


class Objective(Enum):
    CURRENT = "current"
    NEGATIVITY = "negativity"


class KappaMax(NamedTuple):
    kappa: float
    value: float


_COARSE_POINTS = 64
_FLAT_RTOL = 1e-12


def find_kappa_max(params: EngineParams, objective: Objective,
                   bracket: tuple[float, float] | None = None) -> KappaMax:
    """Locate the hot-qubit tunnelling amplitude that maximizes an observable.

    Coarse 64-point scan over the bracket followed by golden-section
    refinement to an interval below 1e-8 of the hot gap. The observable is
    always evaluated on the numeric steady state so that all tunnelling
    values, including zero, go through the same code path.
    """
    if params.regime is not Regime.LOCAL:
        raise DomainError("find_kappa_max requires the local regime")
    objective = Objective(objective)
    if bracket is None:
        bracket = (0.0, 0.2 * params.eps_h)
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (lo < hi):
        raise SpecError(f"bracket must satisfy lo < hi, got ({lo}, {hi})")

    def evaluate(kappa: float) -> float:
        point = replace(params, kappa_h=kappa)
        state = steady_state_numeric(build_local(point))
        if objective is Objective.CURRENT:
            return heat_flow(state, point, Bath.HOT) - heat_flow(state, point, Bath.COLD)
        return negativity(state)

    grid = np.linspace(lo, hi, _COARSE_POINTS)
    values = np.array([evaluate(k) for k in grid])
    spread = float(values.max() - values.min())
    if spread <= _FLAT_RTOL * max(1.0, abs(float(values.max()))):
        raise FlatObjective(
            f"{objective.value} varies by only {spread:.3e} over the bracket"
        )
    peak = int(values.argmax())
    refine_lo = grid[max(peak - 1, 0)]
    refine_hi = grid[min(peak + 1, len(grid) - 1)]
    kappa, value = _golden_max(evaluate, float(refine_lo), float(refine_hi),
                               1e-8 * params.eps_h)
    if values[peak] > value:
        return KappaMax(float(grid[peak]), float(values[peak]))
    return KappaMax(float(kappa), float(value))


# ---------------------------------------------------------------------------
# negativity optimization


class FreeRange(NamedTuple):
    """A free scalar parameter and its inclusive search interval."""

    name: str
    lower: float
    upper: float


@dataclass(frozen=True)
class OptimizationResult:
    best_params: EngineParams
    best_value: float
    evaluations: int
    trace: tuple[tuple[EngineParams, float], ...]


_GRID_POINTS = 128
_POLISH_ROUNDS = 2


def _axis_grid(axis: FreeRange) -> np.ndarray:
    if axis.lower == axis.upper:
        return np.array([axis.lower])
    if not (0.0 < axis.lower < axis.upper):
        raise SpecError(
            f"free range for {axis.name} must satisfy 0 < lower < upper, "
            f"got ({axis.lower}, {axis.upper})"
        )
    return np.geomspace(axis.lower, axis.upper, _GRID_POINTS)


def optimize_negativity(params: EngineParams,
                        free: Sequence[FreeRange | tuple]) -> OptimizationResult:
    """Maximize steady-state negativity over one or two free parameters.

    Dense logarithmic grid (128 points per axis) followed by golden-section
    polish along each axis; grid points that violate the parameter bounds
    are skipped, and an entirely infeasible specification is rejected.
    """
    axes = [FreeRange(*entry) for entry in free]
    if not 1 <= len(axes) <= 2:
        raise SpecError(f"optimize_negativity takes 1 or 2 free parameters, got {len(axes)}")
    names = [axis.name for axis in axes]
    if len(set(names)) != len(names):
        raise SpecError("free parameters must be distinct")
    for name in names:
        if name not in _PARAM_FIELDS:
            raise SpecError(f"unknown free parameter {name!r}")

    trace: list[tuple[EngineParams, float]] = []

    def evaluate(values: Sequence[float]) -> float:
        try:
            point = replace(params, **dict(zip(names, values)))
        except DomainError:
            return -math.inf
        value = report(point).negativity
        trace.append((point, value))
        return value

    grids = [_axis_grid(axis) for axis in axes]
    best_values: list[float] | None = None
    best = -math.inf
    if len(axes) == 1:
        for v in grids[0]:
            score = evaluate((v,))
            if score > best:
                best, best_values = score, [float(v)]
    else:
        for v1 in grids[0]:
            for v2 in grids[1]:
                score = evaluate((v1, v2))
                if score > best:
                    best, best_values = score, [float(v1), float(v2)]
    if best_values is None or best == -math.inf:
        raise SpecError("no feasible point in the requested ranges")

    for _ in range(_POLISH_ROUNDS):
        for index, axis in enumerate(axes):
            grid = grids[index]
            if len(grid) == 1:
                continue
            ratio = (axis.upper / axis.lower) ** (1.0 / (len(grid) - 1))
            lo = max(axis.lower, best_values[index] / ratio)
            hi = min(axis.upper, best_values[index] * ratio)
            if not lo < hi:
                continue

            def along(v: float, index=index) -> float:
                values = list(best_values)
                values[index] = v
                return evaluate(values)

            x, fx = _golden_max(along, lo, hi, 1e-9 * (hi - lo) + 1e-15)
            if fx > best:
                best, best_values[index] = fx, float(x)

    best_params = replace(params, **dict(zip(names, best_values)))
    return OptimizationResult(best_params, best, len(trace), tuple(trace))


# ---------------------------------------------------------------------------
# figure datasets

FIGURE_IDS = ("Fig2", "Fig3", "Fig4", "Fig5", "Fig6")

# weak-coupling baseline of the detuning/tunnelling studies
_WEAK_BASE = dict(eps_h=1.0, delta=0.0, g=1.6e-3, gamma_h=1e-3, gamma_c=1.1e-2,
                  temp_h=0.5, temp_c=0.1)
_WEAK_TEMPS = (0.3, 0.5, 0.7)

# strong-coupling (global) baseline
_STRONG_BASE = dict(eps_h=1.0, delta=0.0, g=0.3, gamma_h=0.01, gamma_c=0.01,
                    temp_h=0.5, temp_c=0.01)
_STRONG_COUPLINGS = (0.3, 0.5, 0.8)
_GAMMA_C_WINDOW = (0.001, 0.1)


def _apply_overrides(defaults: dict, overrides: Mapping[str, float],
                     blocked: tuple[str, ...]) -> dict:
    merged = dict(defaults)
    for key, value in overrides.items():
        if key not in _PARAM_FIELDS:
            raise SpecError(f"unknown figure override {key!r}")
        if key in blocked:
            raise SpecError(f"{key!r} is the sweep axis of this figure and cannot be overridden")
        merged[key] = float(value)
    return merged


def _figure2(overrides: Mapping[str, float]) -> SweepTable:
    """Steady current and negativity against detuning, one curve per hot temperature."""
    merged = _apply_overrides(_WEAK_BASE, overrides, blocked=("delta",))
    temps = (merged["temp_h"],) if "temp_h" in overrides else _WEAK_TEMPS
    deltas = np.linspace(0.0, 0.06 * merged["eps_h"], 301)
    rows = []
    for temp_h in temps:
        for delta in deltas:
            rep = report(EngineParams(**{**merged, "temp_h": temp_h, "delta": float(delta)}))
            rows.append((temp_h, float(delta), rep.current, rep.negativity, ""))
    base = EngineParams(**merged)
    extra = [("figure", "Fig2"),
             ("delta_grid", f"0:{deltas[-1]:.17g}:{len(deltas)}"),
             ("temp_h_values", ",".join(f"{t:.17g}" for t in temps))]
    return SweepTable(("temp_h", "delta", "current", "negativity", "error"),
                      tuple(rows), _base_metadata(base, extra))


def _figure3(overrides: Mapping[str, float]) -> SweepTable:
    """Witness ratio and negativity against detuning at one hot temperature."""
    defaults = {**_WEAK_BASE, "temp_h": 0.3}
    merged = _apply_overrides(defaults, overrides, blocked=("delta",))
    deltas = np.linspace(0.0, 0.06 * merged["eps_h"], 2048)
    rows = []
    for delta in deltas:
        rep = report(EngineParams(**{**merged, "delta": float(delta)}))
        ratio = rep.witness_ratio if rep.witness_ratio is not None else None
        rows.append((float(delta), rep.current, rep.critical_current, ratio,
                     rep.negativity, ""))
    base = EngineParams(**merged)
    extra = [("figure", "Fig3"), ("delta_grid", f"0:{deltas[-1]:.17g}:{len(deltas)}")]
    return SweepTable(
        ("delta", "current", "critical_current", "witness_ratio", "negativity", "error"),
        tuple(rows), _base_metadata(base, extra))


def _figure4(overrides: Mapping[str, float]) -> SweepTable:
    """Current and negativity against hot-qubit tunnelling, with resonance baselines."""
    defaults = {**_WEAK_BASE, "delta": 0.01}
    merged = _apply_overrides(defaults, overrides, blocked=("kappa_h",))
    temps = (merged["temp_h"],) if "temp_h" in overrides else _WEAK_TEMPS
    kappas = np.linspace(0.0, 0.12 * merged["eps_h"], 241)
    rows = []
    baselines: list[tuple[str, str]] = []
    for temp_h in temps:
        resonant = report(EngineParams(**{**merged, "temp_h": temp_h,
                                          "delta": 0.0, "kappa_h": 0.0}))
        baselines.append((f"baseline_current_th{temp_h:g}", _format_cell(resonant.current)))
        baselines.append((f"baseline_negativity_th{temp_h:g}",
                          _format_cell(resonant.negativity)))
        for kappa in kappas:
            rep = report(EngineParams(**{**merged, "temp_h": temp_h,
                                         "kappa_h": float(kappa)}))
            rows.append((temp_h, float(kappa), rep.current, rep.negativity, ""))
    base = EngineParams(**merged)
    extra = [("figure", "Fig4"),
             ("kappa_h_grid", f"0:{kappas[-1]:.17g}:{len(kappas)}"),
             ("temp_h_values", ",".join(f"{t:.17g}" for t in temps))] + baselines
    return SweepTable(("temp_h", "kappa_h", "current", "negativity", "error"),
                      tuple(rows), _base_metadata(base, extra))


def _figure5(overrides: Mapping[str, float]) -> SweepTable:
    """Current and negativity over the tunnelling-detuning plane."""
    defaults = {**_WEAK_BASE, "temp_h": 0.7}
    merged = _apply_overrides(defaults, overrides, blocked=("delta", "kappa_h"))
    spec = SweepSpec(
        base=EngineParams(**merged),
        axis1=SweepAxis("delta", 0.0, 0.05 * merged["eps_h"], 21),
        axis2=SweepAxis("kappa_h", 0.0, 0.2 * merged["eps_h"], 81),
        observables=("current", "negativity"),
    )
    table = sweep(spec)
    return SweepTable(table.columns, table.rows,
                      table.metadata + (("figure", "Fig5"),))


def _figure6(overrides: Mapping[str, float]) -> SweepTable:
    """Cold-coupling-optimized global negativity against hot temperature,
    one curve per inter-qubit coupling, with the thermal comparison column."""
    merged = _apply_overrides(_STRONG_BASE, overrides, blocked=("temp_h",))
    couplings = (merged["g"],) if "g" in overrides else _STRONG_COUPLINGS
    eps = merged["eps_h"]
    temps = np.geomspace(0.02 * eps, 2.0 * eps, 64)
    window = (_GAMMA_C_WINDOW[0] * eps, _GAMMA_C_WINDOW[1] * eps)
    rows = []
    for g in couplings:
        for temp_h in temps:
            base = EngineParams(**{**merged, "g": g, "temp_h": float(temp_h)},
                                regime=Regime.GLOBAL)
            result = optimize_negativity(base, [FreeRange("gamma_c", *window)])
            rows.append((g, float(temp_h), result.best_value,
                         result.best_params.gamma_c,
                         thermal_negativity(eps, g, float(temp_h)), ""))
    base = EngineParams(**merged, regime=Regime.GLOBAL)
    extra = [("figure", "Fig6"),
             ("temp_h_grid", f"{temps[0]:.17g}:{temps[-1]:.17g}:{len(temps)}"),
             ("g_values", ",".join(f"{g:.17g}" for g in couplings)),
             ("gamma_c_window", f"{window[0]:.17g}:{window[1]:.17g}")]
    return SweepTable(
        ("g", "temp_h", "negativity", "gamma_c_opt", "thermal_negativity", "error"),
        tuple(rows), _base_metadata(base, extra))


_FIGURES = {
    "fig2": _figure2,
    "fig3": _figure3,
    "fig4": _figure4,
    "fig5": _figure5,
    "fig6": _figure6,
}


def emit_figure(figure_id: str, overrides: Mapping[str, float] | None = None) -> SweepTable:
    """Produce the dataset behind one of the named figures.

    overrides replaces individual parameters of the figure's defaults; the
    figure's own sweep axis cannot be overridden.
    """
    key = str(figure_id).strip().lower()
    if key not in _FIGURES:
        known = ", ".join(FIGURE_IDS)
        raise SpecError(f"unknown figure {figure_id!r}; expected one of {known}")
    return _FIGURES[key](dict(overrides or {}))
