import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaudin_pair.bethe import BetheProblem, solve
from gaudin_pair.hilbert import Level, LevelScheme, SchemeError, build_basis
from gaudin_pair.operators import build_operator_set, sector_operator_set
from gaudin_pair.oracle import (
    VerificationError,
    basis_change_check,
    commutator_audit,
    exact_diagonalize_sector,
    gaudin_relations_check,
    multi_pair_offshell_check,
    offshell_action_check,
    offshell_remainders,
    oracle_spectra,
    state_residuals,
)
from schemes import random_scheme, two_level_degenerate, two_level_reduced


def full_ops(scheme):
    return build_operator_set(scheme, build_basis(scheme, None))


@pytest.mark.parametrize("scheme", [two_level_degenerate(), two_level_reduced(0.4)], ids=["degenerate", "reduced"])
def test_empty_sector_energy_is_zero(scheme):
    exact = exact_diagonalize_sector(sector_operator_set(scheme, 0), 0)
    assert exact.dim == 1 and abs(exact.energies[0]) < 1e-14


def test_two_level_one_pair_spectrum():
    exact = exact_diagonalize_sector(sector_operator_set(two_level_degenerate(), 1), 1)
    assert np.allclose(exact.energies, [-1.0, 0.0], atol=1e-12)


@pytest.mark.parametrize("mode", ["degenerate", "reduced"])
def test_full_shell_energy(mode):
    scheme = random_scheme(np.random.default_rng(11), mode, n=3)
    exact = exact_diagonalize_sector(sector_operator_set(scheme, scheme.n_max), scheme.n_max)
    eps = scheme.epsilons if mode == "reduced" else np.zeros(scheme.n)
    pair = scheme.cs**2 if mode == "degenerate" else np.full(scheme.n, scheme.d)
    assert exact.energies == pytest.approx([np.sum((2 * eps - scheme.g * pair) * scheme.omegas)])


def test_unrestricted_operators_accepted():
    scheme = two_level_degenerate()
    exact = exact_diagonalize_sector(full_ops(scheme), 1)
    assert np.allclose(exact.energies, [-1.0, 0.0], atol=1e-12)


def test_sector_mismatch_rejected():
    scheme = two_level_degenerate()
    with pytest.raises(SchemeError):
        exact_diagonalize_sector(sector_operator_set(scheme, 1), 0)


def test_dimension_cap():
    scheme = LevelScheme(tuple(Level(3, 0.0, c) for c in (0.3, 0.5, 0.7, 0.9)), 1.0, "degenerate")
    with pytest.raises(SchemeError, match="cap"):
        exact_diagonalize_sector(sector_operator_set(scheme, 6), 6, cap=10)


@given(st.integers(0, 10_000), st.sampled_from(["degenerate", "reduced"]))
def test_joint_basis_is_orthonormal_eigenbasis(seed, mode):
    scheme = random_scheme(np.random.default_rng(seed), mode, n=3)
    n = scheme.n_max // 2
    ops = sector_operator_set(scheme, n)
    exact = exact_diagonalize_sector(ops, n)
    assert np.allclose(exact.vectors.conj().T @ exact.vectors, np.eye(exact.dim), atol=1e-10)
    assert state_residuals(exact, ops).max() < 1e-8
    h = ops.hamiltonian.toarray()
    assert np.linalg.norm(h @ exact.vectors - exact.vectors * exact.energies, axis=0).max() < 1e-8


@given(st.integers(0, 10_000))
def test_degenerate_energy_from_joint_eigenvalues(seed):
    scheme = random_scheme(np.random.default_rng(seed), "degenerate")
    for exact in oracle_spectra(scheme).values():
        rebuilt = scheme.g * exact.invariant_values @ scheme.cs**2
        assert np.allclose(exact.energies, rebuilt, atol=1e-9)


@given(st.integers(0, 10_000))
def test_reduced_invariants_sum_to_pair_number(seed):
    scheme = random_scheme(np.random.default_rng(seed), "reduced")
    for n, exact in oracle_spectra(scheme).items():
        assert np.allclose(exact.invariant_values.sum(axis=1) + scheme.omegas.sum() / 2, n, atol=1e-9)


def test_spectrum_invariant_under_level_permutation():
    scheme = random_scheme(np.random.default_rng(5), "degenerate", n=3)
    perm = LevelScheme(tuple(scheme.levels[i] for i in (2, 0, 1)), scheme.g, "degenerate")
    n = scheme.n_max // 2
    a = exact_diagonalize_sector(sector_operator_set(scheme, n), n)
    b = exact_diagonalize_sector(sector_operator_set(perm, n), n)
    assert np.allclose(a.energies, b.energies, atol=1e-10)


@pytest.mark.parametrize("mode", ["degenerate", "reduced"])
def test_audit_passes_on_random_schemes(mode):
    report = commutator_audit(full_ops(random_scheme(np.random.default_rng(21), mode, n=3)))
    assert report.passed
    assert all(v < 1e-10 for name, v, _, req in report.entries if req and name.startswith("["))


def test_particle_hole_symmetry_is_broken():
    report = commutator_audit(full_ops(two_level_degenerate()))
    assert report.value("||[P1,T]||") > 1e-6


def test_audit_reports_tampered_invariant():
    ops = full_ops(random_scheme(np.random.default_rng(2), "degenerate", n=3))
    bad = dataclasses.replace(ops, invariants=(ops.invariants[0] + ops.number_op @ ops.number_op, *ops.invariants[1:]))
    with pytest.raises(VerificationError) as info:
        commutator_audit(bad)
    names = [name for name, _, _ in info.value.failures]
    assert "H - H(invariants)" in names


def test_audit_non_strict_returns_report():
    ops = full_ops(two_level_degenerate())
    bad = dataclasses.replace(ops, hamiltonian=2.0 * ops.hamiltonian)
    report = commutator_audit(bad, strict=False)
    assert not report.passed


@pytest.mark.parametrize("j", [0, 1])
def test_offshell_at_zero(j):
    scheme = two_level_degenerate()
    assert offshell_action_check(scheme, None, j, 0.0) < 1e-12
    assert offshell_remainders(scheme, [0.0])[0] == 0


def test_offshell_remainder_vanishes_on_shell():
    scheme = two_level_degenerate()
    assert abs(offshell_remainders(scheme, [3.125])[0]) < 1e-10
    assert offshell_action_check(scheme, None, 0, 3.125) < 1e-10


@pytest.mark.parametrize("j", [0, 1])
def test_offshell_generic_point(j):
    assert offshell_action_check(two_level_degenerate(), None, j, 1.7 + 0.3j) < 1e-10


def test_multi_pair_single_root_agrees():
    scheme = random_scheme(np.random.default_rng(4), "degenerate", n=3)
    x = 0.4 - 1.1j
    assert multi_pair_offshell_check(scheme, None, 1, [x]) == offshell_action_check(scheme, None, 1, x)


@given(st.integers(0, 10_000))
def test_multi_pair_identity_off_shell(seed):
    rng = np.random.default_rng(seed)
    scheme = random_scheme(rng, "degenerate", n=3)
    n = int(rng.integers(1, min(4, scheme.n_max) + 1))
    roots = rng.normal(size=n) * 3 + 1j * rng.normal(size=n)
    assert multi_pair_offshell_check(scheme, None, int(rng.integers(scheme.n)), roots) < 1e-10


def test_generic_solutions_have_vanishing_remainders():
    scheme = LevelScheme((Level(2, 0.0, 0.4), Level(1, 0.0, 0.7), Level(2, 0.0, 1.0)), 1.0, "degenerate")
    sols = solve(BetheProblem(scheme, "degenerate_generic", 2))
    assert sols
    for s in sols:
        assert np.abs(offshell_remainders(scheme, s.roots)).max() < 1e-10
        assert max(multi_pair_offshell_check(scheme, None, j, s.roots) for j in range(scheme.n)) < 1e-10


def test_zero_class_remainders_vanish():
    scheme = LevelScheme((Level(2, 0.0, 0.4), Level(1, 0.0, 0.7), Level(2, 0.0, 1.0)), 1.0, "degenerate")
    sols = solve(BetheProblem(scheme, "degenerate_zero", 2))
    assert sols
    for s in sols:
        roots = (0.0, *s.roots)
        assert np.abs(offshell_remainders(scheme, roots)).max() < 1e-10


def test_offshell_needs_degenerate_mode():
    with pytest.raises(SchemeError):
        offshell_action_check(two_level_reduced(), None, 0, 0.5)


def test_offshell_rejects_pole():
    with pytest.raises(SchemeError):
        offshell_action_check(two_level_degenerate(), None, 0, 5.0)


@given(st.complex_numbers(max_magnitude=4.0), st.complex_numbers(max_magnitude=4.0))
def test_gaudin_relations_both_parametrizations(lam, mu):
    if abs(lam - mu) < 1e-2:
        return
    deg = two_level_degenerate()
    red = LevelScheme((Level(1, 0.0), Level(2, 0.7)), 0.5, "reduced")
    for scheme, alphas in [(deg, 1.0 / deg.cs), (red, 2.0 * red.epsilons)]:
        if np.min(np.abs(np.subtract.outer(alphas, [lam, mu]))) < 1e-2:
            continue
        assert gaudin_relations_check(scheme, alphas, lam, mu) < 1e-10


@given(st.complex_numbers(min_magnitude=0.01, max_magnitude=10.0))
def test_basis_change_identity(x):
    scheme = random_scheme(np.random.default_rng(8), "degenerate", n=3)
    if np.min(np.abs(1.0 / scheme.cs**2 - x)) < 1e-2:
        return
    assert basis_change_check(scheme, x) < 1e-10
