"""Sweep orchestration over (gamma_s, alpha^2) grids plus file formats.

Produces one evolved trajectory per grid cell and serializes concurrence
rows to CSV. Cells are independent computations; they may run in a process
pool, but row order and file bytes are identical for any worker count
because every cell is deterministic and results are merged in config order.

File formats
------------
Row CSV: line 1 is "# schema=pseudomode-sweep-rows-1", line 2 the column
header "gamma_s,alpha2,t_scaled,concurrence,c1,c2,trace_error,
min_eigenvalue,path", then one row per (cell, time) with floats at 17
significant digits. gamma_s is always written in gamma0 units, whatever
unit it was entered in. c1/c2 are nan when the general concurrence path was
used.

Grid CSV (single gamma_s only): line 1 "# schema=pseudomode-sweep-grid-1",
header "t_scaled,<alpha2>,...", one row per time with the concurrence of
each alpha^2 column.

Raw state file: line 1 the matrix dimension d, then d*d lines "re im" in
row-major order over the composite-space flat index.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from .dynamics import (
    DEFAULT_STEP,
    FullState,
    IntegrationError,
    Trajectory,
    evolve,
)
from .entanglement import (
    X_TOLERANCE,
    concurrence_general,
    concurrence_x_state,
    x_form_deviation,
)
from .operators import (
    DEFAULT_GAMMA_CAVITY,
    DEFAULT_OMEGA,
    SystemParams,
    build_space,
)
from .states import InitialStateSpec, make_initial

ROWS_SCHEMA = "pseudomode-sweep-rows-1"
GRID_SCHEMA = "pseudomode-sweep-grid-1"
CSV_COLUMNS = ("gamma_s", "alpha2", "t_scaled", "concurrence", "c1", "c2",
               "trace_error", "min_eigenvalue", "path")

RATE_UNITS = ("gamma0", "omega")

# both concurrence paths must agree this well on spot-checked samples
# before a cell is allowed to use the closed-form fast path
DUAL_PATH_TOL = 1e-10

DEFAULT_ESD_THRESHOLD = 1e-6


@dataclass(frozen=True)
class SweepConfig:
    """Full description of one sweep run.

    gamma_s values are interpreted in `rate_unit`: "gamma0" means multiples
    of the reference rate, "omega" means multiples of the coupling. The unit
    must always be stated. Times are scaled (t * gamma0) throughout.
    """

    family: str = "psi"
    theta: float = 0.0
    r: float = 1.0
    alpha2_grid: tuple[float, ...] = (0.5,)
    gamma_s_list: tuple[float, ...] = (0.0,)
    rate_unit: str = "gamma0"
    omega: float = DEFAULT_OMEGA
    gamma_cavity: float = DEFAULT_GAMMA_CAVITY
    gamma0: float = 1.0
    n_fock: int = 3
    t_max: float = 200.0
    n_steps: int = 2000
    step_size: float = DEFAULT_STEP
    method: str = "fixed"
    store_full: bool = False
    esd_threshold: float = DEFAULT_ESD_THRESHOLD
    workers: int = 1
    initial_state_path: str | None = None

    def validate(self) -> None:
        if len(self.alpha2_grid) == 0:
            raise ValueError("alpha2_grid must be non-empty")
        if len(self.gamma_s_list) == 0:
            raise ValueError("gamma_s_list must be non-empty")
        if self.rate_unit not in RATE_UNITS:
            raise ValueError(f"rate_unit must be one of {RATE_UNITS}")
        if self.t_max <= 0:
            raise ValueError("t_max must be > 0")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.esd_threshold < 0:
            raise ValueError("esd_threshold must be >= 0")
        if self.initial_state_path is None:
            # constructing a spec validates family/alpha2/theta/r ranges
            for alpha2 in self.alpha2_grid:
                InitialStateSpec(self.family, alpha2, self.theta, self.r)

    def resolved_gamma_s(self) -> tuple[float, ...]:
        """gamma_s values converted to gamma0 units."""
        if self.rate_unit == "omega":
            return tuple(g * self.omega for g in self.gamma_s_list)
        return tuple(self.gamma_s_list)

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_steps + 1)


@dataclass
class CellResult:
    """One (gamma_s, alpha2) cell. gamma_s is in gamma0 units; alpha2 is nan
    when the initial state came from a raw file."""

    gamma_s: float
    alpha2: float
    times: np.ndarray
    concurrence: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    trace_error: np.ndarray
    min_eigenvalue: np.ndarray
    path: str
    error: str | None = None
    max_trace_error: float = 0.0
    min_eigenvalue_seen: float = 1.0
    max_sector_leakage: float = 0.0
    step_count: int = 0

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class SweepResult:
    config: SweepConfig
    cells: list[CellResult]

    @property
    def failed(self) -> bool:
        return any(c.failed for c in self.cells)

    @property
    def failed_cells(self) -> list[CellResult]:
        return [c for c in self.cells if c.failed]

    def iter_rows(self) -> Iterator[tuple]:
        """Rows in deterministic (cell order, ascending time) order."""
        for cell in self.cells:
            if cell.failed:
                continue
            for i in range(len(cell.times)):
                yield (cell.gamma_s, cell.alpha2, cell.times[i],
                       cell.concurrence[i], cell.c1[i], cell.c2[i],
                       cell.trace_error[i], cell.min_eigenvalue[i], cell.path)


def _cell_initial(config: SweepConfig, alpha2: float, space) -> FullState:
    if config.initial_state_path is not None:
        return load_raw_state(config.initial_state_path)
    spec = InitialStateSpec(config.family, alpha2, config.theta, config.r)
    return make_initial(spec, space)


def _cell_concurrence(traj: Trajectory) -> tuple[np.ndarray, np.ndarray,
                                                 np.ndarray, str]:
    """Concurrence series plus branch values and the path used.

    The closed-form path is taken only if every sample is within X
    tolerance and spot-checked samples agree with the general algorithm.
    """
    n = len(traj.times)
    reduced = traj.reduced
    deviation = max(x_form_deviation(reduced[i]) for i in range(n))
    use_x = deviation <= X_TOLERANCE
    if use_x:
        for i in {0, n // 2, n - 1}:
            gap = abs(concurrence_x_state(reduced[i]).c
                      - concurrence_general(reduced[i]).c)
            if gap > DUAL_PATH_TOL:
                use_x = False
                break
    conc = np.empty(n)
    c1 = np.full(n, math.nan)
    c2 = np.full(n, math.nan)
    if use_x:
        for i in range(n):
            rep = concurrence_x_state(reduced[i])
            conc[i] = rep.c
            c1[i] = rep.c1
            c2[i] = rep.c2
        return conc, c1, c2, "x_state"
    for i in range(n):
        conc[i] = concurrence_general(reduced[i]).c
    return conc, c1, c2, "general"


def _run_cell(config: SweepConfig, gamma_s: float, alpha2: float) -> CellResult:
    """Evolve one cell. gamma_s arrives already in gamma0 units."""
    times = config.times()
    empty = np.empty(0)

    def failed(msg: str) -> CellResult:
        return CellResult(gamma_s=gamma_s, alpha2=alpha2, times=empty,
                          concurrence=empty, c1=empty, c2=empty,
                          trace_error=empty, min_eigenvalue=empty,
                          path="none", error=msg)

    try:
        space = build_space(config.n_fock)
        params = SystemParams.symmetric(
            gamma_s, omega=config.omega, gamma_cavity=config.gamma_cavity,
            gamma0=config.gamma0, n_fock=config.n_fock)
        initial = _cell_initial(config, alpha2, space)
        traj = evolve(initial, space, params, times, method=config.method,
                      step_size=config.step_size,
                      store_full=config.store_full)
        conc, c1, c2, path = _cell_concurrence(traj)
    except (IntegrationError, ValueError, ArithmeticError, OSError) as exc:
        return failed(f"{type(exc).__name__}: {exc}")
    return CellResult(
        gamma_s=gamma_s, alpha2=alpha2, times=traj.times,
        concurrence=conc, c1=c1, c2=c2,
        trace_error=traj.trace_error,
        min_eigenvalue=traj.min_eigenvalue, path=path,
        max_trace_error=traj.diagnostics.max_trace_error,
        min_eigenvalue_seen=traj.diagnostics.min_eigenvalue,
        max_sector_leakage=traj.diagnostics.max_sector_leakage,
        step_count=traj.diagnostics.step_count)


def run_sweep(config: SweepConfig) -> SweepResult:
    """Evolve every (gamma_s, alpha2) cell and collect concurrence rows.

    A cell whose integration breaks an invariant is marked failed (its error
    recorded, its rows omitted); the remaining cells still complete.
    """
    config.validate()
    alpha2_values: tuple[float, ...]
    if config.initial_state_path is not None:
        alpha2_values = (math.nan,)
    else:
        alpha2_values = config.alpha2_grid
    jobs = [(gs, a2) for gs in config.resolved_gamma_s()
            for a2 in alpha2_values]

    if config.workers == 1 or len(jobs) == 1:
        cells = [_run_cell(config, gs, a2) for gs, a2 in jobs]
    else:
        serial_config = replace(config, workers=1)
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(_run_cell, serial_config, gs, a2)
                       for gs, a2 in jobs]
            cells = [f.result() for f in futures]
    return SweepResult(config=config, cells=cells)


def detect_esd_intervals(times, concurrence,
                         threshold: float = DEFAULT_ESD_THRESHOLD
                         ) -> list[tuple[float, float | None]]:
    """Maximal dark intervals: runs of samples with concurrence <= threshold.

    Each interval is (death_time, revival_time); the revival time is the
    first sample where concurrence re-exceeds the threshold, or None when
    the run reaches the end of the series (open-ended, no revival seen).
    Expects a uniformly sampled series.
    """
    times = np.asarray(times, dtype=float)
    conc = np.asarray(concurrence, dtype=float)
    if times.shape != conc.shape or times.ndim != 1:
        raise ValueError("times and concurrence must be equal-length 1d arrays")
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    dark = conc <= threshold
    intervals: list[tuple[float, float | None]] = []
    i = 0
    n = len(dark)
    while i < n:
        if dark[i]:
            j = i
            while j + 1 < n and dark[j + 1]:
                j += 1
            revival = float(times[j + 1]) if j + 1 < n else None
            intervals.append((float(times[i]), revival))
            i = j + 1
        i += 1
    return intervals


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_rows_csv(result: SweepResult, path: str) -> None:
    lines = [f"# schema={ROWS_SCHEMA}", ",".join(CSV_COLUMNS)]
    for row in result.iter_rows():
        *floats, pathname = row
        lines.append(",".join([_fmt(x) for x in floats] + [pathname]))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_grid_csv(result: SweepResult, path: str) -> None:
    """Dense (time, alpha2) concurrence matrix; single gamma_s runs only."""
    gammas = {c.gamma_s for c in result.cells}
    if len(gammas) != 1:
        raise ValueError("grid output requires exactly one gamma_s value")
    if result.failed:
        bad = result.failed_cells[0]
        raise ValueError(
            f"grid output with failed cell alpha2={bad.alpha2}: {bad.error}")
    cells = result.cells
    times = cells[0].times
    header = ["t_scaled"] + [_fmt(c.alpha2) for c in cells]
    lines = [f"# schema={GRID_SCHEMA}", ",".join(header)]
    for i in range(len(times)):
        row = [_fmt(times[i])] + [_fmt(c.concurrence[i]) for c in cells]
        lines.append(",".join(row))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def save_raw_state(state: FullState, path: str) -> None:
    """Plain-text dump: dimension line, then d*d "re im" lines, row-major."""
    rho = state.rho_tilde
    dim = rho.shape[0]
    lines = [str(dim)]
    for value in rho.reshape(-1):
        lines.append(f"{value.real:.17g} {value.imag:.17g}")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_raw_state(path: str) -> FullState:
    """Parse the raw format and enforce density-matrix invariants."""
    with open(path, "r", encoding="ascii") as fh:
        raw = [ln.strip() for ln in fh]
    lines = [ln for ln in raw if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError(f"{path}: empty state file")
    try:
        dim = int(lines[0])
    except ValueError:
        raise ValueError(f"{path}: first line must be the dimension, "
                         f"got {lines[0]!r}") from None
    if dim < 1:
        raise ValueError(f"{path}: dimension must be >= 1, got {dim}")
    if len(lines) - 1 != dim * dim:
        raise ValueError(f"{path}: expected {dim * dim} entry lines for "
                         f"dimension {dim}, found {len(lines) - 1}")
    flat = np.empty(dim * dim, dtype=complex)
    for k, ln in enumerate(lines[1:]):
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(
                f"{path}: entry line {k + 1} must be 're im', got {ln!r}")
        try:
            flat[k] = complex(float(parts[0]), float(parts[1]))
        except ValueError:
            raise ValueError(
                f"{path}: entry line {k + 1} has non-numeric data: {ln!r}"
            ) from None
    state = FullState(rho_tilde=flat.reshape(dim, dim), time=0.0)
    try:
        state.validate()
    except ValueError as exc:
        raise ValueError(f"{path}: not a valid density matrix: {exc}") from exc
    return state
