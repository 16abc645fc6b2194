"""Time evolution of the damped two-qubit / single-mode system.

The state is propagated in the frame rotating at the common transition
frequency, so the generator is time independent:

    d rho / dt = -i [H, rho]
                 + Gamma   * D[a] rho
                 + gamma_a * D[sm_A] rho
                 + gamma_b * D[sm_B] rho

with D[L] rho = L rho L^dag - (L^dag L rho + rho L^dag L) / 2. Everything is
linear, so the equation is integrated in vectorized form v = vec(rho) with
v' = M v for a constant matrix M.

The default integrator is classic fixed-step RK4. For a linear autonomous
system the four stages collapse into a single degree-4 polynomial in (h M);
that matrix is built once per step size and applied as one matvec per step,
which is exactly the RK4 update but much cheaper than four fresh stage
evaluations. An embedded adaptive pair is available as an alternative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entanglement import partial_trace_cavity
from .operators import (
    CompositeSpace,
    SystemParams,
    annihilation,
    build_hamiltonian,
    sigma,
)

# Invariant tolerances for accepted states during integration.
TRACE_TOL = 1e-9
HERM_TOL = 1e-10
EIG_FLOOR = -1e-8
EXCITATION_GAIN_TOL = 1e-8

DEFAULT_STEP = 1e-3


class IntegrationError(RuntimeError):
    """An evolved state broke a physical invariant; carries time and value."""

    def __init__(self, invariant: str, time: float, value: float, limit: float):
        self.invariant = invariant
        self.time = time
        self.value = value
        self.limit = limit
        super().__init__(
            f"invariant '{invariant}' violated at t={time:.6g}: "
            f"value {value:.6g} exceeds limit {limit:.6g}"
        )


@dataclass
class FullState:
    """Density matrix on the composite space, tagged with its time."""

    rho_tilde: np.ndarray
    time: float = 0.0

    def dim(self) -> int:
        return self.rho_tilde.shape[0]

    def validate(self) -> None:
        """Raise ValueError unless this is a physical density matrix."""
        rho = self.rho_tilde
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError(f"state must be a square matrix, got {rho.shape}")
        if not np.all(np.isfinite(rho.view(float))):
            raise ValueError("state contains non-finite entries")
        herm = float(np.abs(rho - rho.conj().T).max())
        if herm > HERM_TOL:
            raise ValueError(f"state not Hermitian: deviation {herm:.3g}")
        tr = abs(complex(np.trace(rho)) - 1.0)
        if tr > TRACE_TOL:
            raise ValueError(f"state trace off by {tr:.3g}")
        min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
        if min_eig < EIG_FLOOR:
            raise ValueError(f"state has negative eigenvalue {min_eig:.3g}")


@dataclass
class IntegrationDiagnostics:
    """Health record of one integration run.

    max_trace_error is tracked at every accepted step, not just at sample
    times; the remaining extrema are tracked at sample times, where the full
    matrix is materialized.
    """

    method: str
    step_count: int = 0
    rejected_steps: int = 0
    max_trace_error: float = 0.0
    max_hermiticity_error: float = 0.0
    min_eigenvalue: float = 1.0
    max_excitation_gain: float = 0.0
    max_sector_leakage: float = 0.0


@dataclass
class Trajectory:
    """Sampled observables along one evolution.

    reduced holds the two-qubit density matrix (mode traced out) at each
    sample time; full composite states are kept only when requested.
    """

    times: np.ndarray
    reduced: np.ndarray
    expect_n: np.ndarray
    trace_error: np.ndarray
    hermiticity_error: np.ndarray
    min_eigenvalue: np.ndarray
    sector_leakage: np.ndarray
    diagnostics: IntegrationDiagnostics
    full_states: list[FullState] | None = None

    def __len__(self) -> int:
        return len(self.times)


def _collapse_ops(space: CompositeSpace, params: SystemParams):
    yield annihilation(space), params.gamma_cavity
    yield sigma(space, "A", "lower"), params.gamma_a
    yield sigma(space, "B", "lower"), params.gamma_b


def lindblad_rhs(space: CompositeSpace, params: SystemParams,
                 rho: np.ndarray) -> np.ndarray:
    """Right-hand side d rho / dt in matrix form."""
    h = build_hamiltonian(space, params)
    out = -1j * (h @ rho - rho @ h)
    for op, rate in _collapse_ops(space, params):
        if rate == 0.0:
            continue
        ld = op.conj().T @ op
        out += rate * (op @ rho @ op.conj().T - 0.5 * (ld @ rho + rho @ ld))
    return out


def liouvillian_matrix(space: CompositeSpace,
                       params: SystemParams) -> np.ndarray:
    """Generator M with vec(d rho/dt) = M vec(rho), row-major vectorization."""
    h = build_hamiltonian(space, params)
    dim = space.dim_total
    eye = np.eye(dim, dtype=complex)
    m = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for op, rate in _collapse_ops(space, params):
        if rate == 0.0:
            continue
        ld = op.conj().T @ op
        m += rate * (np.kron(op, op.conj())
                     - 0.5 * (np.kron(ld, eye) + np.kron(eye, ld.T)))
    return m


def rk4_step_matrix(m: np.ndarray, h: float) -> np.ndarray:
    """One-step propagator I + hM + (hM)^2/2 + (hM)^3/6 + (hM)^4/24.

    Applying it is identical to one classic RK4 step of v' = M v.
    """
    p = np.eye(m.shape[0], dtype=complex)
    term = p
    for k in (1, 2, 3, 4):
        term = (h / k) * (m @ term)
        p = p + term
    return p


def _excitation_weights(space: CompositeSpace) -> np.ndarray:
    w = np.empty(space.dim_total)
    for flat in range(space.dim_total):
        i_a, i_b, n = space.unflatten(flat)
        w[flat] = i_a + i_b + n
    return w


# Dormand-Prince 5(4) tableau for the optional adaptive mode.
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
          187 / 2100, 1 / 40)


class _Sampler:
    """Shared per-sample bookkeeping for both integration modes."""

    def __init__(self, space: CompositeSpace, n_samples: int,
                 store_full: bool, diag: IntegrationDiagnostics):
        self.space = space
        self.dim = space.dim_total
        self.n_weights = _excitation_weights(space)
        self.leak_mask = self.n_weights > 2
        self.diag = diag
        self.idx = 0
        self.prev_expect_n = math.inf
        self.reduced = np.empty((n_samples, 4, 4), dtype=complex)
        self.expect_n = np.empty(n_samples)
        self.trace_error = np.empty(n_samples)
        self.hermiticity_error = np.empty(n_samples)
        self.min_eigenvalue = np.empty(n_samples)
        self.sector_leakage = np.empty(n_samples)
        self.full_states: list[FullState] | None = [] if store_full else None

    def record(self, v: np.ndarray, t: float) -> None:
        dim = self.dim
        rho = v.reshape(dim, dim)
        if not np.all(np.isfinite(rho.view(float))):
            raise IntegrationError("finite", t, math.inf, 0.0)

        herm = float(np.abs(rho - rho.conj().T).max())
        if herm > HERM_TOL:
            raise IntegrationError("hermiticity", t, herm, HERM_TOL)
        tr_err = abs(complex(np.trace(rho)) - 1.0)
        min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
        if min_eig < EIG_FLOOR:
            raise IntegrationError("positivity", t, min_eig, EIG_FLOOR)

        pops = np.real(np.diag(rho))
        expn = float(self.n_weights @ pops)
        gain = expn - self.prev_expect_n
        if gain > EXCITATION_GAIN_TOL:
            raise IntegrationError("excitation_monotone", t, gain,
                                   EXCITATION_GAIN_TOL)
        self.prev_expect_n = expn

        d = self.diag
        d.max_trace_error = max(d.max_trace_error, tr_err)
        d.max_hermiticity_error = max(d.max_hermiticity_error, herm)
        d.min_eigenvalue = min(d.min_eigenvalue, min_eig)
        d.max_excitation_gain = max(d.max_excitation_gain, gain)
        leak = float(pops[self.leak_mask].sum())
        d.max_sector_leakage = max(d.max_sector_leakage, abs(leak))

        i = self.idx
        self.reduced[i] = partial_trace_cavity(rho, self.space).rho
        self.expect_n[i] = expn
        self.trace_error[i] = tr_err
        self.hermiticity_error[i] = herm
        self.min_eigenvalue[i] = min_eig
        self.sector_leakage[i] = leak
        if self.full_states is not None:
            self.full_states.append(FullState(rho.copy(), t))
        self.idx += 1


def _check_step_trace(v: np.ndarray, dim: int, t: float,
                      diag: IntegrationDiagnostics) -> None:
    err = abs(v[:: dim + 1].sum() - 1.0)
    # a NaN trace must abort too, hence the inverted comparison
    if not err <= TRACE_TOL:
        raise IntegrationError("trace", t, float(err), TRACE_TOL)
    if err > diag.max_trace_error:
        diag.max_trace_error = float(err)


def _evolve_fixed(v: np.ndarray, m: np.ndarray, times: np.ndarray,
                  t0: float, step_size: float, sampler: _Sampler,
                  diag: IntegrationDiagnostics) -> None:
    dim = sampler.dim
    cache: dict[int, np.ndarray] = {}
    t = t0
    for t_target in times:
        dt = t_target - t
        if dt > 1e-12:
            n_sub = max(1, math.ceil(dt / step_size - 1e-9))
            h = dt / n_sub
            key = round(h * 1e15)
            prop = cache.get(key)
            if prop is None:
                prop = rk4_step_matrix(m, h)
                cache[key] = prop
            for k in range(n_sub):
                v[:] = prop @ v
                diag.step_count += 1
                _check_step_trace(v, dim, t + (k + 1) * h, diag)
        t = t_target
        sampler.record(v, t)


def _evolve_adaptive(v: np.ndarray, m: np.ndarray, times: np.ndarray,
                     t0: float, step_size: float, atol: float,
                     sampler: _Sampler, diag: IntegrationDiagnostics) -> None:
    dim = sampler.dim
    t = t0
    h = step_size
    k = [np.empty_like(v) for _ in range(7)]
    for t_target in times:
        while t_target - t > 1e-12:
            h = min(h, t_target - t)
            k[0] = m @ v
            for i in range(1, 7):
                vi = v.copy()
                for j, a in enumerate(_DP_A[i]):
                    if a != 0.0:
                        vi += (h * a) * k[j]
                k[i] = m @ vi
            err_vec = np.zeros_like(v)
            for b5, b4, ki in zip(_DP_B5, _DP_B4, k):
                if b5 != b4:
                    err_vec += (h * (b5 - b4)) * ki
            err = float(np.sqrt(np.mean(np.abs(err_vec) ** 2))) / atol
            if err <= 1.0:
                for b5, ki in zip(_DP_B5, k):
                    if b5 != 0.0:
                        v += (h * b5) * ki
                t += h
                diag.step_count += 1
                _check_step_trace(v, dim, t, diag)
            else:
                diag.rejected_steps += 1
            factor = 0.9 * (1.0 / max(err, 1e-10)) ** 0.2
            h *= min(5.0, max(0.2, factor))
        t = t_target
        sampler.record(v, t)


def evolve(initial: FullState, space: CompositeSpace, params: SystemParams,
           times: np.ndarray, *, method: str = "fixed",
           step_size: float = DEFAULT_STEP, atol: float = 1e-10,
           store_full: bool = False) -> Trajectory:
    """Propagate `initial` and sample it at the given absolute times.

    times must be non-decreasing and start at or after initial.time. The
    positivity, hermiticity, trace and excitation-number invariants are
    monitored (not enforced); a violation aborts with IntegrationError so a
    too-coarse step or too-small Fock cutoff cannot silently corrupt results.
    """
    if method not in ("fixed", "adaptive"):
        raise ValueError(f"unknown method {method!r}")
    if step_size <= 0:
        raise ValueError("step_size must be > 0")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("times must be a non-empty 1d array")
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be non-decreasing")
    if times[0] < initial.time - 1e-12:
        raise ValueError("times start before the initial state's time")
    if initial.dim() != space.dim_total:
        raise ValueError("initial state dimension does not match the space")
    try:
        initial.validate()
    except ValueError as exc:
        raise IntegrationError("initial_state", initial.time, math.nan,
                               math.nan) from exc

    diag = IntegrationDiagnostics(method=method)
    sampler = _Sampler(space, len(times), store_full, diag)
    m = liouvillian_matrix(space, params)
    v = initial.rho_tilde.astype(complex).reshape(-1).copy()

    if method == "fixed":
        _evolve_fixed(v, m, times, initial.time, step_size, sampler, diag)
    else:
        _evolve_adaptive(v, m, times, initial.time, step_size, atol,
                         sampler, diag)

    return Trajectory(
        times=times.copy(),
        reduced=sampler.reduced,
        expect_n=sampler.expect_n,
        trace_error=sampler.trace_error,
        hermiticity_error=sampler.hermiticity_error,
        min_eigenvalue=sampler.min_eigenvalue,
        sector_leakage=sampler.sector_leakage,
        diagnostics=diag,
        full_states=sampler.full_states,
    )
