"""Single-particle dynamics on an engineered chain.

Propagators are assembled from the spectral decomposition,
``U(t) = O diag(exp(-i E t)) O^T``, so there is no time-stepping error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .lattice import CouplingPattern, SpectralDecomposition, decompose_pattern


@dataclass(frozen=True, eq=False)
class ObservableSeries:
    """Time x site grids of ``<n_j>`` and ``<n_j^2>``.

    Row ``i`` belongs to ``times[i]``; column ``j`` to site ``j + 1``.
    """

    times: np.ndarray
    mean_n: np.ndarray
    mean_n2: np.ndarray

    @property
    def sites(self) -> np.ndarray:
        return np.arange(1, self.mean_n.shape[1] + 1)

    def site_slice(self, site: int) -> tuple[np.ndarray, np.ndarray]:
        """``<n_site(t)>`` and ``<n_site^2(t)>`` for a 1-based site."""
        return self.mean_n[:, site - 1], self.mean_n2[:, site - 1]


def propagator(decomp: SpectralDecomposition, t: float) -> np.ndarray:
    O = decomp.vectors
    return (O * np.exp(-1j * decomp.energies * t)) @ O.T


def propagators(decomp: SpectralDecomposition, times) -> np.ndarray:
    """Stack of ``U(t)`` for every time, shape ``(T, L, L)``."""
    O = decomp.vectors
    phases = np.exp(-1j * np.outer(np.atleast_1d(times), decomp.energies))
    return np.einsum("nk,tk,mk->tnm", O, phases, O)


def evolve(U: np.ndarray, psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if U.shape[1] != psi.shape[0]:
        raise DimensionError(f"propagator is {U.shape}, state has length {psi.shape[0]}")
    return U @ psi


def site_state(length: int, site: int) -> np.ndarray:
    """Localized state on a 1-based site."""
    psi = np.zeros(length, dtype=complex)
    psi[site - 1] = 1.0
    return psi


def transfer_fidelity(pattern: CouplingPattern, site: int, t: float) -> float:
    """Probability ``|<L+1-m| U(t) |m>|^2`` of reaching the mirror site."""
    L = pattern.length
    if not 1 <= site <= L:
        raise ValueError(f"site must lie in 1..{L}, got {site}")
    U = propagator(decompose_pattern(pattern), t)
    return float(abs(U[L - site, site - 1]) ** 2)


def single_particle_carpet(pattern: CouplingPattern, site: int, times) -> ObservableSeries:
    """Occupation probabilities of a particle launched from ``site``.

    For one particle ``<n_j> = <n_j^2>`` so both grids hold the same values.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    decomp = decompose_pattern(pattern)
    O = decomp.vectors
    # amplitudes <n|U(t)|m> for the launch site only
    amps = (O * O[site - 1]) @ np.exp(-1j * np.outer(decomp.energies, times))
    probs = np.abs(amps.T) ** 2
    return ObservableSeries(times, probs, probs.copy())
