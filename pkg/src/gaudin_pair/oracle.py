"""Brute-force ground truth: dense sector diagonalization, operator audits and
the off-shell action of P_j on unconverged Bethe products."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .hilbert import (
    LevelScheme,
    Mode,
    QuasispinBasis,
    SchemeError,
    StateVector,
    build_basis,
    commutator,
    ladder,
    relative_commutator_norm,
    restrict_operator,
    vacuum_state,
)
from .operators import (
    OperatorSet,
    PairFieldParams,
    build_half_rotation_T,
    build_pair_field,
    build_symmetry_B,
    hamiltonian_from_invariants,
    invariant_sum_formula,
    number_from_invariants,
    sector_operator_set,
)
from .spectrum import empty_shell_eigenvalues

log = logging.getLogger(__name__)

DIM_CAP = 4096
CLUSTER_TOL = 1e-8


class VerificationError(AssertionError):
    """An operator identity failed; ``failures`` lists (name, value, tol)."""

    def __init__(self, failures: list[tuple[str, float, float]]):
        self.failures = failures
        lines = ", ".join(f"{name}={value:.3g} (tol {tol:g})" for name, value, tol in failures)
        super().__init__(f"operator audit failed: {lines}")


@dataclass(frozen=True, eq=False)
class OracleSpectrum:
    """Joint eigendecomposition of H and the invariants on one sector.

    ``vectors`` columns are orthonormal joint eigenvectors; ``energies`` and
    ``invariant_values`` (dim x n) are their eigenvalues; ``multiplets``
    groups columns sharing an energy within the clustering tolerance.
    """

    sector: int
    energies: np.ndarray
    invariant_values: np.ndarray
    vectors: np.ndarray
    multiplets: tuple[tuple[int, ...], ...]
    basis: QuasispinBasis

    @property
    def dim(self) -> int:
        return len(self.energies)

    def joint_table(self) -> np.ndarray:
        """Rows (E, e_1, ..., e_n), one per joint eigenvector."""
        return np.column_stack([self.energies, self.invariant_values])


def _split(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Consecutive runs of sorted ``values`` whose gaps are within tol."""
    if len(values) == 0:
        return []
    cuts = np.flatnonzero(np.diff(values) > tol * np.maximum(1.0, np.abs(values[1:]))) + 1
    return np.split(np.arange(len(values)), cuts)


def _refine(vectors: np.ndarray, op: np.ndarray, tol: float) -> tuple[np.ndarray, list[np.ndarray]]:
    """Diagonalize ``op`` inside span(vectors); return rotated vectors and clusters."""
    sub = vectors.conj().T @ op @ vectors
    w, u = np.linalg.eigh(0.5 * (sub + sub.conj().T))
    return vectors @ u, _split(w, tol)


def exact_diagonalize_sector(
    ops: OperatorSet, sector: int, cap: int = DIM_CAP, tol: float = CLUSTER_TOL
) -> OracleSpectrum:
    """Dense joint diagonalization of H and the invariants on one sector.

    H is diagonalized first; each degenerate block is then resolved with the
    invariants in level order.
    """
    basis = build_basis(ops.scheme, sector)
    if basis.dim > cap:
        raise SchemeError(
            f"sector {sector} has dimension {basis.dim} > cap {cap}; use fewer levels or smaller capacities",
            "desk-scale sector dimension",
        )
    mats = [ops.hamiltonian, *ops.invariants]
    if ops.basis.restricted:
        if ops.basis.sector != sector:
            raise SchemeError(f"operator set lives on sector {ops.basis.sector}, not {sector}", "matching sector")
        dense = [m.toarray() for m in mats]
    else:
        dense = [restrict_operator(m, basis).toarray() for m in mats]
    if basis.dim == 0:
        empty = np.empty(0)
        return OracleSpectrum(sector, empty, np.empty((0, len(ops.invariants))), np.empty((0, 0)), (), basis)

    vectors = np.eye(basis.dim, dtype=complex)
    blocks = [vectors]
    for k, op in enumerate(dense):
        refined = []
        for block in blocks:
            if block.shape[1] == 1 and k > 0:
                refined.append(block)
                continue
            rotated, clusters = _refine(block, op, tol)
            refined.extend(rotated[:, idx] for idx in clusters)
        blocks = refined
    vectors = np.hstack(blocks)
    values = np.array([np.real(np.einsum("ij,ij->j", vectors.conj(), op @ vectors)) for op in dense])
    energies, inv = values[0], values[1:].T

    # Multiplets follow the energy clustering of the first pass.
    order = np.lexsort(inv.T[::-1].tolist() + [energies]) if inv.size else np.argsort(energies, kind="stable")
    vectors, energies, inv = vectors[:, order], energies[order], inv[order]
    multiplets = tuple(tuple(int(i) for i in c) for c in _split(energies, tol))
    return OracleSpectrum(sector, energies, inv.reshape(basis.dim, -1), vectors, multiplets, basis)


# Operator audit

@dataclass
class AuditReport:
    """Named operator-identity checks with the values that were measured."""

    entries: list[tuple[str, float, float, bool]] = field(default_factory=list)
    # (name, value, tolerance, required); informational rows have required=False.

    def add(self, name: str, value: float, tol: float, required: bool = True):
        self.entries.append((name, float(value), tol, required))

    @property
    def failures(self) -> list[tuple[str, float, float]]:
        return [(n, v, t) for n, v, t, req in self.entries if req and not v < t]

    @property
    def passed(self) -> bool:
        return not self.failures

    def value(self, name: str) -> float:
        for n, v, _, _ in self.entries:
            if n == name:
                return v
        raise KeyError(name)


def commutator_audit(ops: OperatorSet, tol: float = 1e-10, strict: bool = True) -> AuditReport:
    """Commutators and reconstruction identities of the operator set.

    Commutators are measured as ||[A, B]|| / (||A|| ||B||) in the Frobenius
    norm; reconstructions as the Frobenius norm of the difference.  On the
    unrestricted basis of a degenerate scheme the B-symmetry is audited and
    ||[P_j, T]|| is recorded as an informational (expected nonzero) entry.
    Raises VerificationError when ``strict`` and any required entry fails.
    """
    scheme = ops.scheme
    name = ops.invariant_name
    report = AuditReport()
    inv = ops.invariants
    for label, op in [("H", ops.hamiltonian), *[(f"{name}{j + 1}", p) for j, p in enumerate(inv)]]:
        report.add(f"hermitian({label})", (op - op.H).norm(), 1e-12)
    for (j, a), (k, b) in itertools.combinations(enumerate(inv), 2):
        report.add(f"[{name}{j + 1},{name}{k + 1}]", relative_commutator_norm(a, b), tol)
    for j, a in enumerate(inv):
        report.add(f"[{name}{j + 1},H]", relative_commutator_norm(a, ops.hamiltonian), tol)
        report.add(f"[{name}{j + 1},N]", relative_commutator_norm(a, ops.number_op), tol)
    report.add("[H,N]", relative_commutator_norm(ops.hamiltonian, ops.number_op), tol)

    if scheme.mode is not Mode.GENERAL:
        report.add("H - H(invariants)", (ops.hamiltonian - hamiltonian_from_invariants(ops)).norm(), tol)
    if scheme.mode is Mode.DEGENERATE:
        total = inv[0]
        for p in inv[1:]:
            total = total + p
        report.add("sum P - quadratic(N)", (total - invariant_sum_formula(ops)).norm(), tol)
        if not ops.basis.restricted:
            b_op = build_symmetry_B(scheme, ops.basis)
            t_op = build_half_rotation_T(scheme, ops.basis)
            for j, p in enumerate(inv):
                report.add(f"[P{j + 1},B]", relative_commutator_norm(p, b_op), tol)
            report.add("[H,B]", relative_commutator_norm(ops.hamiltonian, b_op), tol)
            broken = [commutator(p, t_op).norm() for p in inv]
            for j, v in enumerate(broken):
                report.add(f"||[P{j + 1},T]||", v, np.inf, required=False)
            # No particle-hole symmetry: some [P_j, T] must be nonzero.
            report.add("particle-hole margin 1e-6-max||[P,T]||", 1e-6 - max(broken), 0.0)
    if scheme.mode is Mode.REDUCED:
        report.add("N - sum(R + Omega/2)", (ops.number_op - number_from_invariants(ops)).norm(), tol)

    if strict and not report.passed:
        raise VerificationError(report.failures)
    return report


# Off-shell action of P_j on Bethe products

def _require_degenerate(scheme: LevelScheme):
    if scheme.mode is not Mode.DEGENERATE:
        raise SchemeError("the off-shell identity concerns the degenerate invariants", "mode=degenerate")


def _check_roots(scheme: LevelScheme, roots: np.ndarray, tol: float = 1e-8):
    poles = 1.0 / scheme.cs**2
    if roots.size and np.min(np.abs(poles[:, None] - roots[None, :])) < tol:
        raise SchemeError("off-shell check needs roots away from the poles 1/c_j^2", "parameter off poles")
    if len(roots) > 1:
        d = np.abs(roots[:, None] - roots[None, :]) + np.eye(len(roots))
        if d.min() < tol:
            raise SchemeError("off-shell check needs distinct roots", "distinct roots")
    if len(roots) > scheme.n_max:
        raise SchemeError(f"{len(roots)} roots exceed N_max = {scheme.n_max}", "N <= N_max")


def offshell_remainders(scheme: LevelScheme, roots: Sequence[complex]) -> np.ndarray:
    """Coefficients x_k (sum_l 2/(x_k - x_l) + sum_j Omega_j/(1/c_j^2 - x_k)).

    They vanish exactly when the roots solve the generic-class equations,
    or, for a root at 0, by the x_k prefactor.
    """
    x = np.asarray(roots, dtype=complex).reshape(-1)
    poles = 1.0 / scheme.cs**2
    omegas = scheme.omegas.astype(float)
    out = np.empty(len(x), dtype=complex)
    for k, xk in enumerate(x):
        others = np.delete(x, k)
        out[k] = xk * (np.sum(2.0 / (xk - others)) + np.sum(omegas / (poles - xk)))
    return out


def _product_state(scheme: LevelScheme, roots: Sequence[complex]) -> StateVector:
    state = vacuum_state(build_basis(scheme, 0))
    for r in roots:
        state = build_pair_field(scheme, state.basis, PairFieldParams.degenerate(r), "+") @ state
    return state


def multi_pair_offshell_check(scheme: LevelScheme, basis: QuasispinBasis | None, j: int, roots) -> float:
    """Deviation of P_j S^+(x_1)...S^+(x_N)|0> from its off-shell expansion.

    The expansion is a diagonal term with coefficient
    E_j^(0) - sum_k Omega_j/(1 - c_j^2 x_k) plus, for each k, the remainder
    coefficient times c_j/(1 - c_j^2 x_k) S_j^+ prod_{l != k} S^+(x_l)|0>.
    The returned deviation is relative to max(1, ||P_j psi||).  ``basis`` is
    accepted for interface symmetry; states are built sector by sector.
    """
    _require_degenerate(scheme)
    x = np.asarray(roots, dtype=complex).reshape(-1)
    _check_roots(scheme, x)
    if not 0 <= j < scheme.n:
        raise IndexError(f"level index {j} out of range")
    c = scheme.cs
    omegas = scheme.omegas.astype(float)
    e0 = empty_shell_eigenvalues(scheme)[j]
    psi = _product_state(scheme, x)
    p_j = sector_operator_set(scheme, len(x)).invariants[j]
    lhs = p_j @ psi
    diag = e0 - np.sum(omegas[j] / (1.0 - c[j] ** 2 * x))
    rhs = diag * psi
    raise_j = None
    for k, coeff in enumerate(offshell_remainders(scheme, x)):
        rest = _product_state(scheme, np.delete(x, k))
        if raise_j is None:
            raise_j = ladder(rest.basis, j, +1)
        rhs = rhs + (coeff * c[j] / (1.0 - c[j] ** 2 * x[k])) * (raise_j @ rest)
    return float((lhs - rhs).norm() / max(1.0, lhs.norm()))


def offshell_action_check(scheme: LevelScheme, basis: QuasispinBasis | None, j: int, x: complex) -> float:
    """Single-pair case of :func:`multi_pair_offshell_check`."""
    return multi_pair_offshell_check(scheme, basis, j, [x])


# Rational Gaudin algebra

def gaudin_relations_check(scheme: LevelScheme, alphas: Sequence[float], lam: complex, mu: complex) -> float:
    """Largest deviation from the defining relations of J(a; lam) = sum_j S_j/(a_j - lam).

    Checks [J+(l), J-(m)] = 2 (J0(l) - J0(m))/(l - m),
    [J0(l), J+-(m)] = +-(J+-(l) - J+-(m))/(l - m) and that equal components
    commute, on the unrestricted basis, relative to max(1, ||rhs||).
    """
    basis = build_basis(scheme, None)
    lam, mu = complex(lam), complex(mu)
    if abs(lam - mu) < 1e-12:
        raise ValueError("the relations need distinct spectral parameters")

    def field_at(z, sign):
        return build_pair_field(scheme, basis, PairFieldParams.gaudin(alphas, z), sign)

    j = {(z, sg): field_at(z, sg) for z in (lam, mu) for sg in "+-0"}
    checks = [
        (commutator(j[lam, "+"], j[mu, "-"]), 2.0 * (j[lam, "0"] - j[mu, "0"]) / (lam - mu)),
        (commutator(j[lam, "0"], j[mu, "+"]), (j[lam, "+"] - j[mu, "+"]) / (lam - mu)),
        (commutator(j[lam, "0"], j[mu, "-"]), -1.0 * (j[lam, "-"] - j[mu, "-"]) / (lam - mu)),
    ]
    checks += [(commutator(j[lam, sg], j[mu, sg]), None) for sg in "+-0"]
    worst = 0.0
    for lhs, rhs in checks:
        diff = lhs if rhs is None else lhs - rhs
        scale = 1.0 if rhs is None else max(1.0, rhs.norm())
        worst = max(worst, diff.norm() / scale)
    return worst


def basis_change_check(scheme: LevelScheme, x: complex) -> float:
    """||S^+-(x) - (J^+-(1/c; sqrt x) + J^+-(1/c; -sqrt x))/2|| over both signs.

    Uses the principal square root; the average is even in sqrt(x).
    """
    _require_degenerate(scheme)
    basis = build_basis(scheme, None)
    root = np.sqrt(complex(x))
    alphas = tuple(1.0 / scheme.cs)
    worst = 0.0
    for sign in "+-":
        s_x = build_pair_field(scheme, basis, PairFieldParams.degenerate(x), sign)
        plus = build_pair_field(scheme, basis, PairFieldParams.gaudin(alphas, root), sign)
        minus = build_pair_field(scheme, basis, PairFieldParams.gaudin(alphas, -root), sign)
        worst = max(worst, (s_x - 0.5 * (plus + minus)).norm())
    return worst


def oracle_spectra(scheme: LevelScheme, sectors: Sequence[int] | None = None) -> dict[int, OracleSpectrum]:
    sectors = range(scheme.n_max + 1) if sectors is None else sectors
    return {n: exact_diagonalize_sector(sector_operator_set(scheme, n), n) for n in sectors}


def state_residuals(exact: OracleSpectrum, ops: OperatorSet) -> np.ndarray:
    """Per-vector max_j ||I_j v - e_j v|| for the joint eigenbasis."""
    out = np.zeros(exact.dim)
    mats = [restrict_operator(m, exact.basis).toarray() if not m.domain.restricted else m.toarray() for m in ops.invariants]
    for j, m in enumerate(mats):
        r = m @ exact.vectors - exact.vectors * exact.invariant_values[:, j]
        out = np.maximum(out, np.linalg.norm(r, axis=0))
    return out

