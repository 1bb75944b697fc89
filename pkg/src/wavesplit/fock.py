"""Exact few-boson dynamics on an engineered chain.

Hamiltonian on an open chain::

    H = -sum_n J_n (a_n^+ a_{n+1} + h.c.) + sum_n U_n n_n (n_n - 1) - sum_n B_n n_n

Hard-core bosons are obtained by capping the site occupancy at one, never
through a large ``U``. Evolution uses a dense eigendecomposition, which is
exact at the sizes of interest (a few thousand basis states).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np

from .errors import BudgetExceeded, DimensionError
from .lattice import CouplingPattern, decompose_pattern
from .walk import ObservableSeries, propagator

BUDGET_ENV = "WAVESPLIT_MAX_BASIS"
DEFAULT_BUDGET = 10_000


def basis_budget() -> int:
    """Largest many-body dimension allowed, overridable via the environment."""
    return int(os.environ.get(BUDGET_ENV, DEFAULT_BUDGET))


def count_states(length: int, particles: int, cap: int) -> int:
    """Number of occupation vectors with the given total and site cap."""
    ways = [1] + [0] * particles
    for _ in range(length):
        new = [0] * (particles + 1)
        for total, w in enumerate(ways):
            if w:
                for k in range(min(cap, particles - total) + 1):
                    new[total + k] += w
        ways = new
    return ways[particles]


def _compositions(length, particles, cap):
    if length == 1:
        if particles <= cap:
            yield (particles,)
        return
    for first in range(min(cap, particles), -1, -1):
        for rest in _compositions(length - 1, particles - first, cap):
            yield (first,) + rest


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Occupation vectors of ``particles`` bosons on ``length`` sites.

    States are in descending lexicographic order, e.g. ``(2,0), (1,1), (0,2)``.
    """

    length: int
    particles: int
    cap: int
    states: np.ndarray

    @property
    def size(self) -> int:
        return self.states.shape[0]

    @cached_property
    def _keys(self) -> np.ndarray:
        return self.encode(self.states)

    def encode(self, occupations) -> np.ndarray:
        weights = (self.particles + 1) ** np.arange(self.length - 1, -1, -1, dtype=np.int64)
        return np.asarray(occupations, dtype=np.int64) @ weights

    def find(self, occupations) -> np.ndarray:
        """Basis indices of occupation vectors; ``-1`` where absent."""
        keys = np.atleast_1d(self.encode(occupations))
        # keys of a descending-lex basis are strictly decreasing
        pos = self.size - np.searchsorted(self._keys[::-1], keys, side="right")
        pos = np.clip(pos, 0, self.size - 1)
        return np.where(self._keys[pos] == keys, pos, -1)

    def index(self, occupation) -> int:
        i = int(self.find(np.asarray(occupation)[None, :])[0])
        if i < 0:
            raise KeyError(f"{tuple(occupation)} is not in the basis")
        return i


def enumerate_basis(length: int, particles: int, cap: int | None = None, budget: int | None = None) -> FockBasis:
    """All occupation vectors with ``sum = particles`` and entries ``<= cap``.

    Raises
    ------
    BudgetExceeded
        If the basis would be larger than ``budget`` (default from
        :func:`basis_budget`).
    """
    if particles < 0:
        raise ValueError("particle number must be non-negative")
    cap = particles if cap is None else cap
    if cap < 1:
        raise ValueError("occupancy cap must be at least 1")
    budget = basis_budget() if budget is None else budget
    size = count_states(length, particles, cap)
    if size > budget:
        raise BudgetExceeded(f"Fock basis (L={length}, N={particles}, cap={cap})", size, budget)
    states = np.array(list(_compositions(length, particles, cap)), dtype=np.int64)
    states = states.reshape(size, length)
    states.setflags(write=False)
    return FockBasis(length, particles, cap, states)


@dataclass(frozen=True, eq=False)
class BoseHubbardParams:
    couplings: np.ndarray
    interactions: np.ndarray
    fields: np.ndarray
    hardcore: bool = False

    def __post_init__(self):
        for name in ("couplings", "interactions", "fields"):
            arr = np.array(getattr(self, name), dtype=float).reshape(-1)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, arr)
        L = self.fields.size
        if self.couplings.size != L - 1 or self.interactions.size != L:
            raise DimensionError("need L-1 couplings and L interactions for L fields")

    @classmethod
    def from_pattern(cls, pattern: CouplingPattern, interaction: float | str = 0.0):
        """Chain parameters with a uniform ``U``, or ``"hardcore"``."""
        hardcore = interaction == "hardcore"
        u = 0.0 if hardcore else float(interaction)
        return cls(pattern.couplings, np.full(pattern.length, u), pattern.fields, hardcore)

    @property
    def length(self) -> int:
        return self.fields.size


def build_bh_hamiltonian(params: BoseHubbardParams, basis: FockBasis) -> np.ndarray:
    """Dense real symmetric Hamiltonian on ``basis``.

    Hops that would exceed the basis cap are dropped, which is exactly the
    hard-core projection when the cap is one.
    """
    if params.length != basis.length:
        raise DimensionError(f"parameters for L={params.length}, basis for L={basis.length}")
    if params.hardcore and basis.cap != 1:
        raise ValueError("hard-core parameters need a basis with cap 1")
    s = basis.states
    H = np.zeros((basis.size, basis.size))
    diag = (s * (s - 1)) @ params.interactions - s @ params.fields
    H[np.diag_indices(basis.size)] = diag
    for b, J in enumerate(params.couplings):
        if J == 0.0:
            continue
        # a_b^+ a_{b+1}: move one boson from b+1 to b
        src = np.flatnonzero((s[:, b + 1] > 0) & (s[:, b] < basis.cap))
        moved = s[src].copy()
        amp = -J * np.sqrt((moved[:, b] + 1) * moved[:, b + 1])
        moved[:, b] += 1
        moved[:, b + 1] -= 1
        dst = basis.find(moved)
        H[dst, src] += amp
        H[src, dst] += amp
    return H


@dataclass(frozen=True, eq=False)
class ManyBodyState:
    basis: FockBasis
    amplitudes: np.ndarray

    @classmethod
    def from_occupation(cls, basis: FockBasis, occupation) -> "ManyBodyState":
        psi = np.zeros(basis.size, dtype=complex)
        psi[basis.index(occupation)] = 1.0
        return cls(basis, psi)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: "ManyBodyState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def occupation_from_sites(length: int, sites) -> np.ndarray:
    """Occupation vector with one boson per listed 1-based site (repeats allowed)."""
    occ = np.zeros(length, dtype=np.int64)
    for site in sites:
        if not 1 <= site <= length:
            raise ValueError(f"site {site} outside 1..{length}")
        occ[site - 1] += 1
    return occ


class ExactEvolver:
    """Eigendecomposition of a many-body Hamiltonian, reused across times."""

    def __init__(self, H: np.ndarray, budget: int | None = None):
        budget = basis_budget() if budget is None else budget
        if H.shape[0] > budget:
            raise BudgetExceeded("Hamiltonian", H.shape[0], budget)
        if not np.allclose(H, H.conj().T, atol=1e-12):
            raise ValueError("Hamiltonian must be Hermitian")
        self.energies, self.vectors = np.linalg.eigh(H)

    def amplitudes(self, psi0: np.ndarray, times) -> np.ndarray:
        """Evolved amplitude vectors, shape ``(T, dim)``."""
        coeffs = self.vectors.conj().T @ psi0
        phases = np.exp(-1j * np.outer(np.atleast_1d(times), self.energies))
        return (phases * coeffs) @ self.vectors.T


def evolve_exact(state: ManyBodyState, H: np.ndarray, times) -> list[ManyBodyState]:
    evolver = ExactEvolver(H)
    rows = evolver.amplitudes(state.amplitudes, times)
    return [ManyBodyState(state.basis, row) for row in rows]


def occupation_moments(state: ManyBodyState) -> tuple[np.ndarray, np.ndarray]:
    """Per-site ``<n_j>`` and ``<n_j^2>``."""
    p = np.abs(state.amplitudes) ** 2
    s = state.basis.states
    return p @ s, p @ s**2


def _bunched_pair(basis: FockBasis, n: int, m: int) -> np.ndarray:
    L = basis.length
    occ = np.zeros((2, L), dtype=np.int64)
    occ[0, n - 1] = 2
    occ[1, m - 1] = 2
    idx = basis.find(occ)
    psi_b = np.zeros(basis.size, dtype=complex)
    for i in idx:
        if i >= 0:
            psi_b[i] = 1 / np.sqrt(2)
    return psi_b


def bunching_probability(state: ManyBodyState, n: int, m: int) -> float:
    """``|<psi_b|psi>|^2`` with ``psi_b = (|2>_n|0>_m + |0>_n|2>_m)/sqrt(2)``."""
    if state.basis.particles != 2:
        raise ValueError(f"bunching needs two particles, state has {state.basis.particles}")
    psi_b = _bunched_pair(state.basis, n, m)
    return float(abs(np.vdot(psi_b, state.amplitudes)) ** 2)


def coincidence_probability(state: ManyBodyState, n: int, m: int) -> float:
    """Probability of exactly one particle on each of sites ``n`` and ``m``."""
    if state.basis.particles != 2:
        raise ValueError(f"coincidence needs two particles, state has {state.basis.particles}")
    occ = np.zeros(state.basis.length, dtype=np.int64)
    occ[[n - 1, m - 1]] = 1
    return float(abs(state.amplitudes[state.basis.index(occ)]) ** 2)


def carpet(
    params: BoseHubbardParams,
    sites,
    times,
    budget: int | None = None,
) -> ObservableSeries:
    """Space-time grids of ``<n_j(t)>`` and ``<n_j^2(t)>`` from a Fock state.

    ``sites`` lists the initially occupied 1-based sites, one entry per boson.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    occ = occupation_from_sites(params.length, sites)
    N = int(occ.sum())
    cap = 1 if params.hardcore else N
    if occ.max(initial=0) > cap:
        raise ValueError("hard-core bosons cannot share a site")
    basis = enumerate_basis(params.length, N, cap, budget)
    evolver = ExactEvolver(build_bh_hamiltonian(params, basis), budget)
    psi0 = np.zeros(basis.size, dtype=complex)
    psi0[basis.index(occ)] = 1.0
    probs = np.abs(evolver.amplitudes(psi0, times)) ** 2
    s = basis.states
    return ObservableSeries(times, probs @ s, probs @ s**2)


def permanent(M: np.ndarray) -> complex:
    """Exact permanent by Ryser's inclusion-exclusion formula."""
    M = np.asarray(M)
    n = M.shape[0]
    if n == 0:
        return 1.0
    total = 0.0
    for r in range(1, n + 1):
        for cols in combinations(range(n), r):
            total += (-1) ** r * np.prod(M[:, cols].sum(axis=1))
    return (-1) ** n * total


def free_boson_oracle(pattern: CouplingPattern, occupation, t: float) -> dict[tuple, complex]:
    """Final-state amplitudes of non-interacting bosons via permanents.

    Each boson's creation operator evolves with the single-particle
    propagator ``U(t)``, so the amplitude of final occupation ``r`` from
    initial occupation ``s`` is ``perm(U[r, s]) / sqrt(prod r! prod s!)``
    with rows and columns repeated according to the occupations.
    """
    occupation = np.asarray(occupation, dtype=np.int64)
    L = pattern.length
    N = int(occupation.sum())
    U = propagator(decompose_pattern(pattern), t)
    cols = np.repeat(np.arange(L), occupation)
    norm_in = math.prod(math.factorial(k) for k in occupation)
    out = {}
    for final in _compositions(L, N, N):
        rows = np.repeat(np.arange(L), final)
        norm_out = math.prod(math.factorial(k) for k in final)
        out[final] = complex(permanent(U[np.ix_(rows, cols)])) / math.sqrt(norm_in * norm_out)
    return out


def free_fermion_density(pattern: CouplingPattern, sites, times) -> np.ndarray:
    """``<n_j(t)>`` of free fermions started on distinct 1-based ``sites``.

    The evolved Slater determinant has orbitals ``U(t)[:, s]``; the density
    is the diagonal of its correlation matrix ``C = Phi Phi^+``. Hard-core
    bosons on an open chain share this density.
    """
    cols = np.asarray(sites) - 1
    if len(set(cols.tolist())) != cols.size:
        raise ValueError("fermion sites must be distinct")
    decomp = decompose_pattern(pattern)
    out = []
    for t in np.atleast_1d(times):
        phi = propagator(decomp, t)[:, cols]
        out.append(np.real(np.einsum("ja,ja->j", phi, phi.conj())))
    return np.array(out)


def free_pair_amplitudes(U: np.ndarray, n: int, m: int) -> tuple[complex, complex, complex]:
    """Amplitudes of ``|2_n>``, ``|2_m>`` and ``|1_n 1_m>`` for free bosons on ``n, m``.

    Uses 2x2 permanents of the single-particle propagator.
    """
    i, j = n - 1, m - 1
    a_nn = np.sqrt(2) * U[i, i] * U[i, j]
    a_mm = np.sqrt(2) * U[j, i] * U[j, j]
    a_nm = U[i, i] * U[j, j] + U[i, j] * U[j, i]
    return a_nn, a_mm, a_nm


def free_bunching_probability(U: np.ndarray, n: int, m: int) -> float:
    a_nn, a_mm, _ = free_pair_amplitudes(U, n, m)
    return float(abs((a_nn + a_mm) / np.sqrt(2)) ** 2)


def hardcore_coincidence_probability(U: np.ndarray, n: int, m: int) -> float:
    """``P(1_n 1_m)`` for hard-core bosons started on ``n, m`` (a 2x2 determinant)."""
    i, j = n - 1, m - 1
    return float(abs(U[i, i] * U[j, j] - U[i, j] * U[j, i]) ** 2)
