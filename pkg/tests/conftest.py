import numpy as np
import pytest

from pseudomode import build_space


@pytest.fixture(scope="session")
def space3():
    return build_space(3)


def random_x_state(rng: np.random.Generator) -> np.ndarray:
    """Random physical X state: Dirichlet diagonal plus feasible coherences.

    Positivity of the two 2x2 blocks requires |w| <= sqrt(a d) and
    |z| <= sqrt(b c).
    """
    d, c, b, a = rng.dirichlet(np.ones(4))
    w = (np.sqrt(a * d) * rng.uniform(0.0, 1.0)
         * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi)))
    z = (np.sqrt(b * c) * rng.uniform(0.0, 1.0)
         * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi)))
    rho = np.diag(np.array([d, c, b, a], dtype=complex))
    rho[3, 0] = w
    rho[0, 3] = w.conjugate()
    rho[1, 2] = z
    rho[2, 1] = z.conjugate()
    return rho


def random_density_matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Full-rank random state (normalized Wishart)."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
