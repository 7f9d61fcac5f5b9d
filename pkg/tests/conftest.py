"""Shared samplers for property tests.

Random physical covariance matrices are produced as symplectic conjugations
of thermal spectra; random monitoring matrices come from Gaussian
measurement seeds that are physical with respect to the channel pair form,
so every sampled unravelling corresponds to an actual measurement.
"""

import numpy as np
import pytest
from scipy.linalg import expm

from gendyne import (
    CouplingOperators,
    DriftDiffusion,
    ThermalBath,
    UnravellingMatrix,
    symplectic_form,
    thermal_drift_diffusion,
)


def random_symplectic(n: int, rng: np.random.Generator, scale: float = 0.7) -> np.ndarray:
    """exp(Omega Q) with Q symmetric is symplectic."""
    q = rng.standard_normal((2 * n, 2 * n)) * scale
    q = (q + q.T) / 2.0
    return expm(symplectic_form(n) @ q)


def random_physical_cm(
    n: int, rng: np.random.Generator, max_thermal: float = 3.0, pure: bool = False
) -> np.ndarray:
    nu = np.ones(n) if pure else 1.0 + rng.uniform(0.0, max_thermal, n)
    s = random_symplectic(n, rng)
    return s @ np.diag(np.repeat(nu, 2)) @ s.T


def _xpxp_to_xxpp(n: int) -> np.ndarray:
    p = np.zeros((2 * n, 2 * n))
    for j in range(n):
        p[j, 2 * j] = 1.0
        p[n + j, 2 * j + 1] = 1.0
    return p


def random_valid_unravelling(num_ops: int, rng: np.random.Generator) -> UnravellingMatrix:
    """U = (sigma_m + 1)^-1 for a random physical measurement seed sigma_m.

    sigma_m is a bona fide Gaussian CM with respect to the channel pair form
    S = [[0, 1], [-1, 0]] (real/imaginary halves), which guarantees the
    resulting monitoring is realizable and keeps conditional states physical.
    """
    s = random_symplectic(num_ops, rng)
    nu = 1.0 + rng.uniform(0.0, 3.0, num_ops)
    sigma_m = s @ np.diag(np.repeat(nu, 2)) @ s.T
    p = _xpxp_to_xxpp(num_ops)
    sigma_m = p @ sigma_m @ p.T
    u = np.linalg.inv(sigma_m + np.eye(2 * num_ops))
    return UnravellingMatrix.from_u_matrix((u + u.T) / 2.0)


def random_stable_thermal_system(
    rng: np.random.Generator,
    n: int | None = None,
    max_occupation: float = 3.0,
    hamiltonian_norm: float = 0.45,
) -> tuple[DriftDiffusion, CouplingOperators, ThermalBath]:
    """Random quadratic system with independent thermal baths, always stable.

    The Hamiltonian spectral norm is capped below 1/2 so that
    A + A^T = Omega H - H Omega - 1 stays negative definite.
    """
    if n is None:
        n = int(rng.integers(1, 4))
    occ = tuple(rng.uniform(0.0, max_occupation, n))
    h = rng.standard_normal((2 * n, 2 * n)) * 0.15
    h = (h + h.T) / 2.0
    norm = np.linalg.norm(h, 2)
    if norm > hamiltonian_norm:
        h *= hamiltonian_norm / norm
    bath = ThermalBath(occ)
    dd, couplings = thermal_drift_diffusion(h, bath)
    return dd, couplings, bath


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260809)
