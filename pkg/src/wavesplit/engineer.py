"""Inverse-eigenvalue engineering of perfect-splitting chains.

A mirror-symmetric chain of length ``L`` has exactly ``L`` free parameters:
``N`` couplings and ``L - N`` fields with ``N = L // 2``. Newton's method on
``f(lam) = E(lam) - E_target`` then works with a square Jacobian, whose
entries follow from first-order perturbation theory on the eigenvectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import LineSearchError, SingularJacobianError, SpectrumError, SolverError, SymmetryError
from .lattice import (
    ChainSpec,
    CouplingPattern,
    SpectralDecomposition,
    build_hopping_matrix,
    check_mirror_symmetry,
    decompose_pattern,
    pst_couplings,
)
from .walk import propagator


@dataclass(frozen=True, eq=False)
class TargetSpectrum:
    """Desired eigenvalues (ascending, units of the energy scale).

    ``exp(-i E_k t*) = exp(i global_phase) (cos theta + i s_k sin theta)``
    where ``s_k`` alternates in sign and starts at ``orientation`` for the
    lowest level.
    """

    values: np.ndarray
    theta: float
    revival_time: float
    global_phase: float = 0.0
    orientation: int = 1

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if np.any(np.diff(v) <= 0):
            raise ValueError("target eigenvalues must be strictly ascending")

    @classmethod
    def from_values(cls, values, revival_time: float = 1.0) -> "TargetSpectrum":
        """Wrap an arbitrary ascending target; phase metadata is left blank."""
        return cls(values, theta=float("nan"), revival_time=revival_time)

    def __len__(self):
        return self.values.size


def _phase_sequence(indices: np.ndarray, theta: float) -> np.ndarray:
    # ..., -theta - 2pi, theta - 2pi, -theta, theta, -theta + 2pi, ...
    return np.where(indices % 2 == 0, -theta, theta) + 2 * np.pi * (indices // 2)


def target_spectrum(spec: ChainSpec) -> TargetSpectrum:
    """Splitting target for ``spec.theta`` at ``t* = L / J``.

    Picks the ``L`` consecutive phases of the alternating sequence whose sum
    is smallest in magnitude, then removes the mean so the spectrum is
    traceless. The removed mean is the global phase. For odd ``L`` two
    windows tie; the one starting at ``-theta`` is taken.
    """
    L, theta, t_star = spec.length, spec.theta, spec.revival_time
    if theta == 0.0:
        raise ValueError("theta = 0 gives a degenerate target (identity at t*)")
    best = None
    for start in range(-2 * L - 2, 3):
        window = _phase_sequence(np.arange(start, start + L), theta)
        key = (round(abs(window.sum()), 9), start % 2)
        if best is None or key < best[0]:
            best = (key, window, start)
    _, window, start = best
    alpha = float(window.mean())
    phases = window - alpha
    return TargetSpectrum(
        phases / t_star,
        theta=theta,
        revival_time=t_star,
        global_phase=alpha,
        orientation=1 if start % 2 == 0 else -1,
    )


def parameterize(pattern: CouplingPattern) -> np.ndarray:
    """Independent entries ``(J_1..J_N, B_1..B_{L-N})`` of a mirror pattern."""
    if not check_mirror_symmetry(pattern).symmetric:
        raise SymmetryError("only mirror-symmetric patterns can be parameterized")
    L = pattern.length
    N = L // 2
    return np.concatenate([pattern.couplings[:N], pattern.fields[: L - N]])


def deparameterize(params, length: int) -> CouplingPattern:
    params = np.asarray(params, dtype=float)
    N = length // 2
    return CouplingPattern.symmetric(params[:N], params[N:], length)


def _check_gap(decomp: SpectralDecomposition, scale: float, gap: float):
    if decomp.size > 1:
        min_gap = np.diff(decomp.energies).min()
        if min_gap < gap * max(scale, 1e-300):
            raise SpectrumError(f"spectrum is degenerate (gap {min_gap:.2e})")


def _jacobian(decomp: SpectralDecomposition) -> np.ndarray:
    # dE_m/dlam_k = <v_m| dH/dlam_k |v_m>; every dH/dlam_k touches one bond or
    # one site plus its mirror image, so each column is a few products.
    O = decomp.vectors
    L = decomp.size
    N = L // 2
    jac = np.empty((L, L))
    for k in range(N):
        col = O[k] * O[k + 1]
        mirror = L - 2 - k
        if mirror != k:
            col = col + O[mirror] * O[mirror + 1]
        jac[:, k] = -2.0 * col
    for k in range(L - N):
        col = O[k] ** 2
        mirror = L - 1 - k
        if mirror != k:
            col = col + O[mirror] ** 2
        jac[:, N + k] = -col
    return jac


def spectral_jacobian(pattern: CouplingPattern, degeneracy_gap: float = 1e-10) -> np.ndarray:
    """Derivatives of the ascending eigenvalues w.r.t. the independent parameters.

    Row ``m`` is eigenvalue ``m``; column ``k`` is parameter ``k`` in the
    order of :func:`parameterize`.

    Raises
    ------
    SymmetryError
        If the pattern is not mirror-symmetric.
    SpectrumError
        If two eigenvalues are closer than ``degeneracy_gap * ||H||``.
    """
    parameterize(pattern)
    H = build_hopping_matrix(pattern)
    decomp = decompose_pattern(pattern)
    _check_gap(decomp, np.abs(H).sum(axis=1).max(), degeneracy_gap)
    return _jacobian(decomp)


def finite_difference_jacobian(pattern: CouplingPattern, step: float = 1e-6) -> np.ndarray:
    lam = parameterize(pattern)
    L = pattern.length
    jac = np.empty((L, L))
    for k in range(L):
        dp = np.zeros(L)
        dp[k] = step
        up = decompose_pattern(deparameterize(lam + dp, L)).energies
        down = decompose_pattern(deparameterize(lam - dp, L)).energies
        jac[:, k] = (up - down) / (2 * step)
    return jac


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-12
    max_iterations: int = 200
    max_halvings: int = 30
    check_jacobian: bool = False
    fd_step: float = 1e-6
    degeneracy_gap: float = 1e-10

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


class TraceRow(NamedTuple):
    iteration: int
    residual: float
    step: float


@dataclass(frozen=True, eq=False)
class SolverResult:
    pattern: CouplingPattern
    residual: float
    iterations: int
    converged: bool
    field_norm: float
    trace: tuple[TraceRow, ...] = field(default=())


def _residual(pattern, target_values):
    decomp = decompose_pattern(pattern)
    f = decomp.energies - target_values
    return decomp, f, float(np.abs(f).max())


def _gauge_fix(pattern: CouplingPattern) -> CouplingPattern:
    # diag(+-1) similarity flips coupling signs without touching the spectrum
    lam = parameterize(pattern)
    N = pattern.length // 2
    lam[:N] = np.abs(lam[:N])
    return deparameterize(lam, pattern.length)


def newton_solve(
    initial: CouplingPattern,
    target: TargetSpectrum | np.ndarray,
    config: SolverConfig | None = None,
) -> SolverResult:
    """Damped Newton iteration towards a prescribed spectrum.

    Each step solves ``J dlam = -f`` and halves the step until the sup-norm
    residual decreases. Returns the best iterate with ``converged=False`` if
    the iteration budget runs out.

    Raises
    ------
    SingularJacobianError
        The Jacobian cannot be inverted at the current iterate.
    LineSearchError
        No step length reduced the residual.
    """
    config = config or SolverConfig()
    values = target.values if isinstance(target, TargetSpectrum) else np.asarray(target, float)
    L = initial.length
    if values.size != L:
        raise ValueError(f"target has {values.size} values for a chain of {L} sites")
    lam = parameterize(initial)
    pattern = deparameterize(lam, L)
    decomp, f, res = _residual(pattern, values)
    trace = [TraceRow(0, res, 0.0)]

    if config.check_jacobian:
        analytic = _jacobian(decomp)
        numeric = finite_difference_jacobian(pattern, config.fd_step)
        err = np.abs(analytic - numeric).max() / max(np.abs(numeric).max(), 1.0)
        if err > 1e-5:
            raise SolverError(f"Jacobian mismatch {err:.2e}", pattern, 0, res)

    iterations = 0
    while res > config.tolerance and iterations < config.max_iterations:
        scale = np.abs(build_hopping_matrix(pattern)).sum(axis=1).max()
        try:
            _check_gap(decomp, scale, config.degeneracy_gap)
            jac = _jacobian(decomp)
            if np.linalg.cond(jac) > 1e14:
                raise np.linalg.LinAlgError("ill-conditioned")
            step = np.linalg.solve(jac, -f)
        except (np.linalg.LinAlgError, SpectrumError) as exc:
            raise SingularJacobianError(str(exc), pattern, iterations, res) from exc

        length = 1.0
        for _ in range(config.max_halvings + 1):
            trial_lam = lam + length * step
            trial = deparameterize(trial_lam, L)
            t_decomp, t_f, t_res = _residual(trial, values)
            if np.isfinite(t_res) and t_res < res:
                break
            length /= 2
        else:
            raise LineSearchError("residual could not be decreased", pattern, iterations, res)

        lam, pattern, decomp, f, res = trial_lam, trial, t_decomp, t_f, t_res
        iterations += 1
        trace.append(TraceRow(iterations, res, length))

    pattern = _gauge_fix(pattern)
    return SolverResult(
        pattern=pattern,
        residual=res,
        iterations=iterations,
        converged=res <= config.tolerance,
        field_norm=float(np.abs(pattern.fields).max()),
        trace=tuple(trace),
    )


def engineer_splitting(spec: ChainSpec, config: SolverConfig | None = None) -> SolverResult:
    """Solve for the splitting pattern of ``spec`` seeded from the PST couplings."""
    return newton_solve(pst_couplings(spec), target_spectrum(spec), config)


class PhaseCheck(NamedTuple):
    residual: float
    phase_residual: float
    global_phase: float
    orientation: int


def splitting_phase_check(decomp: SpectralDecomposition, spec: ChainSpec) -> PhaseCheck:
    """How far the eigenphases at ``t*`` are from the splitting condition.

    The global phase is fitted and both alternation orientations are tried.
    ``residual`` is the worst eigenphase error divided by ``t*``, i.e. in
    energy units; ``phase_residual`` is the same error in radians.
    """
    t_star = spec.revival_time
    w = np.exp(-1j * decomp.energies * t_star)
    alt = (-1.0) ** np.arange(decomp.size)
    best = None
    for orientation in (1, -1):
        z = np.cos(spec.theta) + 1j * orientation * alt * np.sin(spec.theta)
        alpha = float(np.angle(np.sum(w * np.conj(z))))
        err = np.abs(np.angle(w * np.conj(z) * np.exp(-1j * alpha))).max()
        if best is None or err < best[1]:
            best = (float(err) / t_star, float(err), alpha, orientation)
    return PhaseCheck(*best)


@dataclass(frozen=True, eq=False)
class SplittingReport:
    deviation: float
    magnitudes: np.ndarray
    expected: np.ndarray


def expected_splitting_moduli(length: int, theta: float) -> np.ndarray:
    """``|cos(theta) delta_nm + i sin(theta) delta_{n, L+1-m}|``.

    On the centre site of an odd chain both terms coincide and the modulus
    is 1.
    """
    eye = np.eye(length, dtype=complex)
    return np.abs(np.cos(theta) * eye + 1j * np.sin(theta) * eye[::-1])


def verify_splitting(pattern: CouplingPattern, spec: ChainSpec) -> SplittingReport:
    """Compare ``|U(t*)|`` entrywise with the ideal splitter of angle ``theta``."""
    U = propagator(decompose_pattern(pattern), spec.revival_time)
    mags = np.abs(U)
    expected = expected_splitting_moduli(pattern.length, spec.theta)
    return SplittingReport(float(np.abs(mags - expected).max()), mags, expected)
