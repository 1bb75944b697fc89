import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from wavesplit.engineer import (
    SolverConfig,
    TargetSpectrum,
    deparameterize,
    engineer_splitting,
    expected_splitting_moduli,
    finite_difference_jacobian,
    newton_solve,
    parameterize,
    spectral_jacobian,
    splitting_phase_check,
    target_spectrum,
    verify_splitting,
)
from wavesplit.errors import LineSearchError, SingularJacobianError, SpectrumError, SymmetryError
from wavesplit.lattice import (
    GOLDEN_PATTERNS,
    ChainSpec,
    CouplingPattern,
    decompose_pattern,
    pst_couplings,
)

from conftest import random_mirror_pattern, splitting_pattern

Q = np.pi / 4


def _dense(couplings, fields):
    # independent of the package: plain numpy assembly
    return -np.diag(fields) - np.diag(couplings, 1) - np.diag(couplings, -1)


def _oracle_jacobian(lam, L, h=1e-6):
    N = L // 2

    def energies(p):
        half_j, half_b = p[:N], p[N:]
        j = np.concatenate([half_j, half_j[: (L - 1) - N][::-1]])
        b = np.concatenate([half_b, half_b[: L - (L - N)][::-1]])
        return np.linalg.eigvalsh(_dense(j, b))

    cols = []
    for k in range(L):
        e = np.zeros(L)
        e[k] = h
        cols.append((energies(lam + e) - energies(lam - e)) / (2 * h))
    return np.array(cols).T


def test_target_l6_frozen():
    t = target_spectrum(ChainSpec(6))
    base = np.array([-Q - 2 * np.pi, Q - 2 * np.pi, -Q, Q, -Q + 2 * np.pi, Q + 2 * np.pi])
    np.testing.assert_allclose(t.values, base / 6, atol=1e-15)
    assert t.global_phase == pytest.approx(0.0, abs=1e-15)
    assert t.orientation == 1


def test_target_l4_orientation():
    t = target_spectrum(ChainSpec(4))
    base = np.array([Q - 2 * np.pi, -Q, Q, -Q + 2 * np.pi])
    np.testing.assert_allclose(t.values, base / 4, atol=1e-15)
    assert t.orientation == -1


def test_target_l5_tie_break_starts_at_minus_theta():
    t = target_spectrum(ChainSpec(5))
    window = np.array([-Q - 2 * np.pi, Q - 2 * np.pi, -Q, Q, -Q + 2 * np.pi])
    np.testing.assert_allclose(t.values, (window - window.mean()) / 5, atol=1e-15)
    assert t.global_phase == pytest.approx(window.mean())
    assert t.orientation == 1


def test_target_rejects_zero_theta():
    with pytest.raises(ValueError):
        target_spectrum(ChainSpec(4, theta=0.0))


@pytest.mark.parametrize("L", [2, 3, 4, 5, 8, 11, 20])
@pytest.mark.parametrize("theta", [0.3, Q, 1.2])
def test_target_satisfies_phase_condition(L, theta):
    spec = ChainSpec(L, 1.3, theta)
    t = target_spectrum(spec)
    assert abs(t.values.sum()) < 1e-12
    s = t.orientation * (-1.0) ** np.arange(L)
    lhs = np.exp(-1j * t.values * spec.revival_time)
    rhs = np.exp(1j * t.global_phase) * (np.cos(theta) + 1j * s * np.sin(theta))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_target_rejects_unsorted():
    with pytest.raises(ValueError):
        TargetSpectrum.from_values([1.0, 0.0])


def test_parameterize_round_trip():
    p = GOLDEN_PATTERNS["golden-5"]
    np.testing.assert_array_equal(parameterize(p), [0.6195, 0.6664, 0.08378, 0.2932, -0.7540])
    assert deparameterize(parameterize(p), 5) == p


def test_parameterize_rejects_asymmetric():
    with pytest.raises(SymmetryError):
        parameterize(CouplingPattern([1.0, 2.0], [0, 0, 0]))


@settings(max_examples=40, deadline=None)
@given(L=st.integers(3, 12), seed=st.integers(0, 2**32 - 1))
def test_jacobian_matches_independent_finite_difference(L, seed):
    p = random_mirror_pattern(np.random.default_rng(seed), L)
    gaps = np.diff(decompose_pattern(p).energies)
    if gaps.min() < 1e-3:
        return
    oracle = _oracle_jacobian(parameterize(p), L)
    np.testing.assert_allclose(spectral_jacobian(p), oracle, atol=1e-6)
    np.testing.assert_allclose(finite_difference_jacobian(p), oracle, atol=1e-6)


def test_jacobian_two_site():
    # E = -B -+ J, with one field parameter shared by both sites
    p = CouplingPattern([0.7], [0.2, 0.2])
    np.testing.assert_allclose(spectral_jacobian(p), [[-1, -1], [1, -1]], atol=1e-14)


def test_jacobian_rejects_degenerate():
    with pytest.raises(SpectrumError):
        spectral_jacobian(CouplingPattern([0.0], [0.0, 0.0]))


def test_newton_two_site_closed_form():
    result = engineer_splitting(ChainSpec(2))
    assert result.converged
    np.testing.assert_allclose(result.pattern.couplings, [np.pi / 8], atol=1e-15)


def test_newton_l6_matches_golden():
    result = engineer_splitting(ChainSpec(6))
    assert result.converged and result.residual <= 1e-12
    np.testing.assert_allclose(result.pattern.couplings[:3], [0.5999, 0.8279, 0.3927], atol=1e-4)
    assert result.field_norm <= 1e-12


def test_newton_l5_matches_golden():
    result = engineer_splitting(ChainSpec(5))
    np.testing.assert_allclose(result.pattern.couplings, GOLDEN_PATTERNS["golden-5"].couplings, atol=1e-4)
    np.testing.assert_allclose(result.pattern.fields, GOLDEN_PATTERNS["golden-5"].fields, atol=1e-4)


@pytest.mark.parametrize("L", [4, 6, 8, 10, 50])
def test_even_chains_need_no_fields(L):
    assert engineer_splitting(ChainSpec(L)).field_norm <= 1e-8


@pytest.mark.parametrize("L", [3, 7, 49])
def test_odd_chains_need_central_fields(L):
    p = splitting_pattern(L)
    centre = p.fields[L // 2]
    assert abs(centre) > 1e-2
    # fields oscillate in sign towards the centre
    half = p.fields[: L // 2 + 1]
    big = half[np.abs(half) > 1e-3]
    assert np.any(np.sign(big[1:]) != np.sign(big[:-1])) or big.size == 1


@pytest.mark.parametrize("L", [3, 5, 9, 12])
def test_residual_trace_is_monotone(L):
    trace = engineer_splitting(ChainSpec(L)).trace
    res = [row.residual for row in trace]
    assert all(b < a for a, b in zip(res, res[1:]))
    assert all(0 < row.step <= 1 for row in trace[1:])


@pytest.mark.parametrize("L", [4, 5, 13])
@pytest.mark.parametrize("theta", [0.4, 1.1])
def test_other_angles_split(L, theta):
    spec = ChainSpec(L, 0.8, theta)
    result = engineer_splitting(spec)
    assert result.converged
    assert verify_splitting(result.pattern, spec).deviation <= 1e-9


def test_newton_reaches_random_feasible_target(rng):
    for L in (4, 7, 10):
        truth = random_mirror_pattern(rng, L, field_scale=0.3)
        energies = decompose_pattern(truth).energies
        start = truth.with_values(couplings=truth.couplings * 1.05)
        result = newton_solve(start, energies)
        assert result.converged
        np.testing.assert_allclose(decompose_pattern(result.pattern).energies, energies, atol=1e-11)


def test_newton_reports_budget_exhaustion():
    result = engineer_splitting(ChainSpec(20), SolverConfig(max_iterations=1))
    assert not result.converged
    assert result.iterations == 1


def test_newton_singular_jacobian():
    with pytest.raises(SingularJacobianError):
        newton_solve(CouplingPattern([0.0, 0.0], [0.0, 0.0, 0.0]), [-1.0, 0.0, 1.0])


def test_newton_line_search_failure():
    # the full step lands on J = -1, whose sorted spectrum is no closer
    start = CouplingPattern([1.0], [0.0, 0.0])
    with pytest.raises(LineSearchError) as info:
        newton_solve(start, [1.0, -1.0], SolverConfig(max_halvings=0))
    assert info.value.iteration == 0
    assert info.value.residual == pytest.approx(2.0)


def test_newton_rejects_wrong_size():
    with pytest.raises(ValueError):
        newton_solve(pst_couplings(ChainSpec(4)), [0.0, 1.0])


def test_jacobian_self_check_passes():
    assert engineer_splitting(ChainSpec(7), SolverConfig(check_jacobian=True)).converged


def test_expected_moduli():
    np.testing.assert_allclose(
        expected_splitting_moduli(3, Q),
        [[Q_c := np.cos(Q), 0, np.sin(Q)], [0, 1, 0], [np.sin(Q), 0, Q_c]],
        atol=1e-15,
    )


def test_verify_splitting_l6_against_expm():
    p = splitting_pattern(6)
    U = expm(1j * 6.0 * (np.diag(p.couplings, 1) + np.diag(p.couplings, -1)))
    np.testing.assert_allclose(np.abs(U), expected_splitting_moduli(6, Q), atol=1e-10)
    assert verify_splitting(p, ChainSpec(6)).deviation <= 1e-10


def test_pst_chain_is_not_a_splitter():
    spec = ChainSpec(6)
    assert verify_splitting(pst_couplings(spec), spec).deviation > 0.5


def test_phase_check_frozen_orientations():
    for L, orient in [(4, -1), (6, 1), (8, -1), (10, 1)]:
        check = splitting_phase_check(decompose_pattern(splitting_pattern(L)), ChainSpec(L))
        assert check.residual <= 1e-10
        assert check.orientation == orient
