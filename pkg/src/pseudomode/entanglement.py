"""Two-qubit reduction and concurrence.

Basis-ordering contract
-----------------------
Reduced two-qubit matrices use the basis {|00>, |10>, |01>, |11>} (first
label qubit A, second qubit B), i.e. row index = i_a + 2*i_b. States reached
from the supported initial families keep the "X" sparsity pattern in this
basis:

    [ d    0    0    w* ]
    [ 0    c    z    0  ]
    [ 0    z*   b    0  ]
    [ w    0    0    a  ]

so a = P(11), b = P(01), c = P(10), d = P(00), w = <11|rho|00> is the
two-photon coherence and z = <10|rho|01> the one-excitation coherence. The
closed-form branches read

    C1 = 2|w| - 2 sqrt(b c),   C2 = 2|z| - 2 sqrt(a d),
    C  = max{0, C1, C2}.

The general path computes Wootters concurrence from the spectrum of
R = rho (sy x sy) rho* (sy x sy) and works for any two-qubit state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

X_TOLERANCE = 1e-9

_HERM_TOL = 1e-8
_TRACE_TOL = 1e-9
_EIG_FLOOR = -1e-8
_IMAG_TOL = 1e-10
_CLIP_FLOOR = -1e-12

_SIGMA_Y = np.array([[0.0, -1j], [1j, 0.0]])
_SIGMA_YY = np.kron(_SIGMA_Y, _SIGMA_Y)

# True on the diagonal and anti-diagonal; False on the eight entries that
# must vanish for an X state.
_X_MASK = np.logical_or(np.eye(4, dtype=bool), np.eye(4, dtype=bool)[::-1])


@dataclass
class ReducedState:
    """4x4 two-qubit density matrix in the basis documented above."""

    rho: np.ndarray

    def validate(self) -> None:
        _validate_rho4(self.rho, check_psd=True)


@dataclass
class ConcurrenceReport:
    """Concurrence c plus per-path detail.

    c1, c2 are the closed-form branch values (X-state path only); lambdas
    are the four square-rooted eigenvalues of R in decreasing order (general
    path only).
    """

    c: float
    path: str
    c1: float | None = None
    c2: float | None = None
    lambdas: np.ndarray | None = None


def _as_rho4(reduced) -> np.ndarray:
    rho = getattr(reduced, "rho", reduced)
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {rho.shape}")
    return rho


def _validate_rho4(rho: np.ndarray, check_psd: bool = False) -> None:
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {rho.shape}")
    herm = float(np.abs(rho - rho.conj().T).max())
    if herm > _HERM_TOL:
        raise ValueError(f"matrix not Hermitian: deviation {herm:.3g}")
    tr_err = abs(complex(np.trace(rho)) - 1.0)
    if tr_err > _TRACE_TOL:
        raise ValueError(f"matrix trace off by {tr_err:.3g}")
    if check_psd:
        min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
        if min_eig < _EIG_FLOOR:
            raise ValueError(f"matrix has negative eigenvalue {min_eig:.3g}")


def partial_trace_cavity(state, space) -> ReducedState:
    """Trace out the mode: rho[(i,j),(k,l)] = sum_n rho_full[(i,j,n),(k,l,n)].

    Accepts a FullState or a bare composite-space matrix; `space` may be a
    CompositeSpace or the integer Fock cutoff.
    """
    rho_full = np.asarray(getattr(state, "rho_tilde", state))
    n_fock = getattr(space, "n_fock", space)
    dim = 4 * n_fock
    if rho_full.shape != (dim, dim):
        raise ValueError(
            f"state shape {rho_full.shape} does not match cutoff {n_fock}")
    t = rho_full.reshape(2, 2, n_fock, 2, 2, n_fock)
    r = np.einsum("abncdn->abcd", t)
    # kron layout is A-major; reorder to the documented i_a + 2*i_b basis
    return ReducedState(rho=r.transpose(1, 0, 3, 2).reshape(4, 4).copy())


def x_form_deviation(rho) -> float:
    """Largest magnitude among the eight entries an X state must not have."""
    return float(np.abs(_as_rho4(rho)[~_X_MASK]).max())


def concurrence_general(reduced) -> ConcurrenceReport:
    """Wootters concurrence via the spectrum of R = rho (sy x sy) rho* (sy x sy).

    The eigenvalues are taken from the Hermitian equivalent
    sqrt(rho) (sy x sy) rho* (sy x sy) sqrt(rho), which shares R's spectrum
    but is normal, so the eigenvalues stay well conditioned even for pure
    and near-pure input where R itself is defective. Imaginary parts from
    the solver are required to be below 1e-10; eigenvalues within 1e-12 of
    zero are snapped to zero before the square roots (rank deficiency shows
    up as +-1e-16 rounding, and sqrt would amplify it to 1e-8).
    """
    rho = _as_rho4(reduced)
    _validate_rho4(rho)
    mu, vecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    if float(mu[0]) < _EIG_FLOOR:
        raise ValueError(f"matrix has negative eigenvalue {mu[0]:.3g}")
    sqrt_rho = (vecs * np.sqrt(np.clip(mu, 0.0, None))) @ vecs.conj().T
    r_herm = sqrt_rho @ _SIGMA_YY @ rho.conj() @ _SIGMA_YY @ sqrt_rho
    vals = np.linalg.eigvals(r_herm)
    max_imag = float(np.abs(vals.imag).max())
    if max_imag > _IMAG_TOL:
        raise ArithmeticError(
            f"eigenvalues of R have imaginary part {max_imag:.3g} > {_IMAG_TOL}")
    real = vals.real
    if float(real.min()) < _CLIP_FLOOR:
        raise ArithmeticError(
            f"eigenvalue {real.min():.3g} below the clipping floor {_CLIP_FLOOR}")
    real = np.where(np.abs(real) <= -_CLIP_FLOOR, 0.0, real)
    lambdas = np.sort(np.sqrt(real))[::-1]
    c = float(lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3])
    c = min(max(c, 0.0), 1.0)
    return ConcurrenceReport(c=c, path="general", lambdas=lambdas)


def concurrence_x_state(reduced, x_tolerance: float = X_TOLERANCE) -> ConcurrenceReport:
    """Closed-form concurrence for X states; rejects anything off-pattern."""
    rho = _as_rho4(reduced)
    _validate_rho4(rho)
    dev = float(np.abs(rho[~_X_MASK]).max())
    if dev > x_tolerance:
        raise ValueError(
            f"not an X state: off-pattern entry of magnitude {dev:.3g} "
            f"exceeds tolerance {x_tolerance:.3g}")
    d = max(rho[0, 0].real, 0.0)
    c_mid = max(rho[1, 1].real, 0.0)
    b_mid = max(rho[2, 2].real, 0.0)
    a = max(rho[3, 3].real, 0.0)
    w = rho[3, 0]
    z = rho[1, 2]
    c1 = 2.0 * (abs(w) - math.sqrt(b_mid * c_mid))
    c2 = 2.0 * (abs(z) - math.sqrt(a * d))
    c = min(max(0.0, c1, c2), 1.0)
    return ConcurrenceReport(c=c, path="x_state", c1=float(c1), c2=float(c2))


def independent_decay_concurrence(alpha2: float, gamma_s: float, times):
    """Closed-form concurrence with the mode decoupled (coupling = 0).

    For an initial alpha|00> + beta|11> with alpha^2 = `alpha2`, pure
    independent emission at rate gamma_s on each qubit gives

        C(t) = max{0, 2 e^{-g t} (sqrt(alpha2 beta2) - beta2 (1 - e^{-g t}))}

    with beta2 = 1 - alpha2 and g = gamma_s. Serves as an exact reference
    for the full simulation in the decoupled limit.
    """
    if not 0.0 <= alpha2 <= 1.0:
        raise ValueError("alpha2 must lie in [0, 1]")
    if gamma_s < 0:
        raise ValueError("gamma_s must be >= 0")
    t = np.asarray(times, dtype=float)
    beta2 = 1.0 - alpha2
    decay = np.exp(-gamma_s * t)
    c1 = 2.0 * decay * (math.sqrt(alpha2 * beta2) - beta2 * (1.0 - decay))
    return np.maximum(0.0, c1)


def independent_decay_death_time(alpha2: float, gamma_s: float) -> float | None:
    """Time where the decoupled-limit concurrence first hits zero for good.

    Finite only when alpha2 < 1/2 (and the rate is nonzero); returns None
    when the state stays entangled at all finite times.
    """
    if not 0.0 <= alpha2 <= 1.0:
        raise ValueError("alpha2 must lie in [0, 1]")
    if gamma_s <= 0 or alpha2 >= 0.5:
        return None
    if alpha2 == 0.0:
        return 0.0
    ratio = math.sqrt(alpha2 / (1.0 - alpha2))
    return -math.log(1.0 - ratio) / gamma_s
