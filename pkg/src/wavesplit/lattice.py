"""Chains, coupling patterns and the single-particle hopping matrix.

The hopping matrix of a chain with couplings ``J_n`` and fields ``B_n`` is

    H = -sum_n J_n (|n><n+1| + |n+1><n|) - sum_n B_n |n><n|

Couplings are stored as magnitudes; the minus signs live in
:func:`build_hopping_matrix`. Sites are numbered 1..L in docstrings and
stored 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import DimensionError, SpectrumError, SymmetryError

PARITY_EPS = 1e-10


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ChainSpec:
    """Length, energy unit and splitting angle of a chain.

    The revival time is fixed to ``t* = L / J``.
    """

    length: int
    energy_unit: float = 1.0
    theta: float = np.pi / 4

    def __post_init__(self):
        if int(self.length) != self.length or self.length < 2:
            raise ValueError(f"chain length must be an integer >= 2, got {self.length}")
        if not self.energy_unit > 0:
            raise ValueError(f"energy unit must be positive, got {self.energy_unit}")
        if not 0.0 <= self.theta <= np.pi / 2:
            raise ValueError(f"splitting angle must lie in [0, pi/2], got {self.theta}")
        object.__setattr__(self, "length", int(self.length))

    @property
    def revival_time(self) -> float:
        return self.length / self.energy_unit


@dataclass(frozen=True, eq=False)
class CouplingPattern:
    """Hopping strengths ``J_1..J_{L-1}`` and local fields ``B_1..B_L``.

    Arrays are read-only copies. Use :meth:`symmetric` to build a pattern
    from its independent entries; mirror copies are then exact.
    """

    couplings: np.ndarray
    fields: np.ndarray
    _mirror: bool | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "couplings", _frozen(self.couplings))
        object.__setattr__(self, "fields", _frozen(self.fields))
        if self.fields.size != self.couplings.size + 1:
            raise DimensionError(
                f"{self.fields.size} fields need {self.fields.size - 1} couplings, "
                f"got {self.couplings.size}"
            )
        if self.fields.size < 1:
            raise DimensionError("a chain needs at least one site")
        if self._mirror and not check_mirror_symmetry(self).symmetric:
            raise SymmetryError("pattern declared mirror-symmetric is not")

    @classmethod
    def symmetric(cls, half_couplings, half_fields, length: int) -> "CouplingPattern":
        """Build a mirror-symmetric pattern from its independent entries.

        For ``L = 2N`` pass ``N`` couplings (bonds 1..N) and ``N`` fields; for
        ``L = 2N + 1`` pass ``N`` couplings and ``N + 1`` fields (sites
        1..N+1, the last being the centre).
        """
        half_couplings = np.asarray(half_couplings, dtype=float).reshape(-1)
        half_fields = np.asarray(half_fields, dtype=float).reshape(-1)
        n_half = length // 2
        n_fields = length - n_half
        if half_couplings.size != n_half or half_fields.size != n_fields:
            raise DimensionError(
                f"L={length} needs {n_half} couplings and {n_fields} fields, "
                f"got {half_couplings.size} and {half_fields.size}"
            )
        if length % 2 == 0:
            couplings = np.concatenate([half_couplings, half_couplings[-2::-1]])
            fields = np.concatenate([half_fields, half_fields[::-1]])
        else:
            couplings = np.concatenate([half_couplings, half_couplings[::-1]])
            fields = np.concatenate([half_fields, half_fields[-2::-1]])
        return cls(couplings, fields, _mirror=True)

    @classmethod
    def uniform(cls, length: int, coupling: float = 1.0, field: float = 0.0):
        return cls(np.full(length - 1, coupling), np.full(length, field))

    @property
    def length(self) -> int:
        return self.fields.size

    @property
    def is_mirror_symmetric(self) -> bool:
        if self._mirror is not None:
            return self._mirror
        return check_mirror_symmetry(self).symmetric

    def with_values(self, couplings=None, fields=None) -> "CouplingPattern":
        """Copy with some entries replaced; mirror metadata is recomputed."""
        return CouplingPattern(
            self.couplings if couplings is None else couplings,
            self.fields if fields is None else fields,
        )

    def __eq__(self, other):
        if not isinstance(other, CouplingPattern):
            return NotImplemented
        return np.array_equal(self.couplings, other.couplings) and np.array_equal(
            self.fields, other.fields
        )

    def __hash__(self):
        return hash((self.couplings.tobytes(), self.fields.tobytes()))


class MirrorCheck(NamedTuple):
    symmetric: bool
    asymmetry: float


def check_mirror_symmetry(pattern: CouplingPattern) -> MirrorCheck:
    """Test ``J_{L-n} = J_n`` and ``B_{L+1-n} = B_n`` exactly.

    Also returns the largest absolute mismatch for diagnostics.
    """
    dj = np.abs(pattern.couplings - pattern.couplings[::-1])
    db = np.abs(pattern.fields - pattern.fields[::-1])
    asym = float(max(dj.max(initial=0.0), db.max(initial=0.0)))
    return MirrorCheck(asym == 0.0, asym)


def pst_couplings(spec: ChainSpec) -> CouplingPattern:
    """Closed-form perfect-state-transfer couplings.

    ``J_n = (pi J / 2L) sqrt(n (L - n))`` with zero fields; transfers site
    ``m`` to ``L + 1 - m`` at ``t* = L / J``.
    """
    L = spec.length
    n = np.arange(1, L // 2 + 1)
    half = np.pi * spec.energy_unit / (2 * L) * np.sqrt(n * (L - n))
    return CouplingPattern.symmetric(half, np.zeros(L - L // 2), L)


def build_hopping_matrix(pattern: CouplingPattern) -> np.ndarray:
    """Dense real symmetric tridiagonal matrix ``<n|H|m>``."""
    c = pattern.couplings
    if pattern.fields.size != c.size + 1:
        raise DimensionError("fields must have one more entry than couplings")
    H = np.diag(-pattern.fields)
    if c.size:
        H -= np.diag(c, 1) + np.diag(c, -1)
    return H


def reversal_matrix(length: int) -> np.ndarray:
    return np.eye(length)[::-1]


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """``H = O diag(E) O^T`` with ascending ``E``.

    Column ``k`` of ``vectors`` is the eigenvector of ``energies[k]``; its
    first nonzero entry is made positive.
    """

    energies: np.ndarray
    vectors: np.ndarray

    @property
    def size(self) -> int:
        return self.energies.size

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.energies) @ self.vectors.T


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # first row positive; when it vanishes fall back to the first nonzero entry
    signs = np.ones(vectors.shape[1])
    for k in range(vectors.shape[1]):
        col = vectors[:, k]
        nz = np.flatnonzero(np.abs(col) > PARITY_EPS * np.abs(col).max())
        if nz.size and col[nz[0]] < 0:
            signs[k] = -1.0
    return vectors * signs


def eigendecompose(H: np.ndarray) -> SpectralDecomposition:
    """Spectral decomposition of a symmetric tridiagonal hopping matrix.

    Raises
    ------
    DimensionError
        If ``H`` is not square, symmetric and tridiagonal.
    SpectrumError
        If the tridiagonal eigensolver fails.
    """
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {H.shape}")
    if not np.array_equal(H, H.T):
        raise DimensionError("hopping matrix must be symmetric")
    if np.any(np.triu(H, 2)):
        raise DimensionError("hopping matrix must be tridiagonal")
    if H.shape[0] == 1:
        energies, vectors = H[0].copy(), np.ones((1, 1))
    else:
        try:
            energies, vectors = scipy.linalg.eigh_tridiagonal(
                np.diag(H).copy(), np.diag(H, 1).copy()
            )
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SpectrumError(f"tridiagonal eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(energies)) or energies.size != H.shape[0]:
        raise SpectrumError("eigensolver returned an incomplete spectrum")
    vectors = _fix_signs(vectors)
    energies.setflags(write=False)
    vectors.setflags(write=False)
    return SpectralDecomposition(energies, vectors)


def decompose_pattern(pattern: CouplingPattern) -> SpectralDecomposition:
    return eigendecompose(build_hopping_matrix(pattern))


@dataclass(frozen=True)
class ParityReport:
    """Signs ``s_k = sign(O_Lk / O_1k)`` of the eigenvectors.

    ``alternates`` is true when every eigenvector is a mirror eigenvector
    ``R v_k = s_k v_k`` and the signs flip at every step.
    """

    signs: tuple[int, ...]
    alternates: bool
    first_sign: int


def eigenvector_parity(decomp: SpectralDecomposition, atol: float = 1e-8) -> ParityReport:
    O = decomp.vectors
    first, last = O[0], O[-1]
    if np.any(np.abs(first) < PARITY_EPS):
        raise SpectrumError(
            "eigenvector vanishes on site 1; parity undefined "
            "(non-mirror-symmetric input or degenerate spectrum)"
        )
    signs = tuple(int(s) for s in np.sign(last / first))
    # the sign ratio alternates for any Jacobi matrix, so also require R v = s v
    definite = np.abs(O[::-1] - O * np.array(signs)).max() <= atol
    alternates = definite and all(a == -b for a, b in zip(signs, signs[1:])) and 0 not in signs
    return ParityReport(signs, alternates, signs[0])


# Reference balanced-splitting Hamiltonians for L = 5 and L = 6, given to four
# digits, stored in the magnitude convention: couplings are the printed
# off-diagonal entries, fields are minus the printed diagonal.
GOLDEN_PATTERNS = {
    "golden-5": CouplingPattern.symmetric([0.6195, 0.6664], [0.08378, 0.2932, -0.7540], 5),
    "golden-6": CouplingPattern.symmetric([0.5999, 0.8279, 0.3927], [0.0, 0.0, 0.0], 6),
}
